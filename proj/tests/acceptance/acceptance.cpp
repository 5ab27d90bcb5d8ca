// SPDX-License-Identifier: Apache-2.0
// Acceptance gate: one [PASS]/[FAIL] line per criterion, details indented
// below it. Exit status is nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "scorelab/analytic.hpp"
#include "scorelab/ensemble.hpp"
#include "scorelab/equivalence.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/metrics.hpp"
#include "scorelab/oracle.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"
#include "scorelab/sweep.hpp"

using namespace scorelab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool passed = true;
    std::vector<std::string> details;

    void check(bool ok, std::string line) {
        passed = passed && ok;
        details.push_back((ok ? "ok    " : "FAIL  ") + std::move(line));
    }
    void note(std::string line) { details.push_back("      " + std::move(line)); }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const std::shared_ptr<GaussianOracle> kPointMass = std::make_shared<GaussianOracle>(Vec{0.0}, 0.0);

// ---------------------------------------------------------------------------

Outcome c1_cas_consistency() {
    Outcome r;
    const auto t0 = Clock::now();
    double worst_analytic = 0.0, worst_mc = 0.0;
    for (std::size_t n : {4, 8, 32, 128}) {
        const auto sched = NoiseSchedule::build_geometric(1.0, 0.01, n);
        for (double eps : {1.1, 2.0, 5.0}) {
            const SamplerConfig cfg{Scheme::CasEpsC, eps};
            const auto report = consistency_report(*kPointMass, sched, cfg);
            worst_analytic = std::max(worst_analytic, report.max_deviation);
            r.check(report.max_deviation <= 1e-10,
                    fmt("N=%zu eps_c=%g analytic max deviation %.3g (<= 1e-10)", n, eps, report.max_deviation));

            EnsembleOptions opts;
            opts.chains = 100000;
            opts.seed = 1000 + n;
            opts.keep_final_states = false;
            opts.step_moments = true;
            const auto mc = run_ensemble(*kPointMass, sched, cfg, opts);
            std::vector<double> tau;
            for (std::size_t k : level_end_steps(mc.plan, n)) tau.push_back(std::sqrt(mc.moments[k + 1].variance));
            const auto mc_report = make_consistency_report(sched, tau);
            worst_mc = std::max(worst_mc, mc_report.max_deviation);
            r.check(mc_report.max_deviation <= 0.02,
                    fmt("N=%zu eps_c=%g Monte Carlo (1e5 chains) max deviation %.4f (<= 0.02)", n, eps,
                        mc_report.max_deviation));
        }
    }
    const double t = seconds_since(t0);
    r.check(t < 30.0, fmt("runtime %.2f s (< 30 s)", t));
    r.note(fmt("worst analytic %.3g, worst Monte Carlo %.4f", worst_analytic, worst_mc));
    return r;
}

// ---------------------------------------------------------------------------

Outcome c2_equivalences() {
    Outcome r;
    EquivalenceOptions opts;
    opts.gammas = {0.5, 0.9, 0.99};
    opts.dims = {1, 8};
    opts.tolerance = 1e-12;
    std::map<std::string, double> worst;
    for (const auto& c : verify_equivalences(opts)) {
        worst[c.name] = std::max(worst[c.name], c.max_error);
        if (!c.passed) {
            r.check(false, fmt("%s gamma=%g dim=%zu rel error %.3g", c.name.c_str(), c.gamma, c.dim, c.max_error));
        }
    }
    for (const char* name : {"eq8-form", "denoise-interp", "noise-denoise", "pc-deterministic", "pc-noise-ratio",
                             "als-noise-ratio", "stream-alignment"}) {
        const bool present = worst.count(name) > 0;
        r.check(present && worst[name] <= 1e-12,
                fmt("%-17s worst relative error %.3g over gamma {0.5, 0.9, 0.99} x dim {1, 8}", name,
                    present ? worst[name] : std::numeric_limits<double>::quiet_NaN()));
    }
    return r;
}

// ---------------------------------------------------------------------------

Outcome c3_boundaries() {
    Outcome r;
    const std::vector<double> gammas{0.01, 0.1, 0.5, 0.9, 0.99, 0.999};

    std::size_t rejected = 0, total = 0;
    for (double g : gammas) {
        const double lo = 1.0 - g, hi = 1.0 + g;
        for (double eta : {std::nextafter(lo, -1.0), lo * 0.5, -0.3, std::nextafter(hi, 3.0), hi + 0.5, 10.0,
                           std::numeric_limits<double>::quiet_NaN()}) {
            ++total;
            try {
                (void)beta_of_eta(eta, g);
            } catch (const DomainError&) {
                ++rejected;
            }
        }
    }
    r.check(rejected == total, fmt("beta_of_eta rejected %zu/%zu etas outside [1 - gamma, 1 + gamma]", rejected, total));

    std::size_t accepted = 0, inside = 0, warned = 0, above_one = 0;
    for (double g : gammas) {
        for (int k = 0; k <= 20; ++k) {
            const double eta = std::clamp((1.0 - g) + 2.0 * g * k / 20.0, 1.0 - g, 1.0 + g);
            ++inside;
            try {
                const auto b = beta_of_eta(eta, g);
                ++accepted;
                if (eta > 1.0) {
                    ++above_one;
                    warned += b.amplifies ? 1 : 0;
                } else if (b.amplifies) {
                    r.check(false, fmt("eta=%g gamma=%g flagged as amplifying", eta, g));
                }
            } catch (const DomainError&) {
            }
        }
    }
    r.check(accepted == inside, fmt("beta_of_eta accepted %zu/%zu etas inside the bounds", accepted, inside));
    r.check(warned == above_one, fmt("amplification flagged for %zu/%zu etas in (1, 1 + gamma]", warned, above_one));

    // The warning reaches the plan that a sampler run reports.
    const auto sched = NoiseSchedule::build_geometric(1.0, 0.01, 8);
    const double eta_amp = 1.0 + 0.5 * sched.gamma();
    const auto plan = plan_steps(sched, {Scheme::CasEpsB, eta_amp * 0.01 * 0.01});
    const auto plain = plan_steps(sched, {Scheme::CasEpsB, 0.9 * 0.01 * 0.01});
    r.check(plan.amplification_warning && !plain.amplification_warning,
            "plan for eta in (1, 1 + gamma] carries the amplification warning, eta = 0.9 does not");
    const auto trace = run_chain(*kPointMass, sched, {Scheme::CasEpsB, eta_amp * 0.01 * 0.01}, 3, 1);
    r.check(trace.amplification_warning, "chain trace surfaces the warning");

    std::size_t in_range = 0, probes = 0;
    double worst_eta = 0.0;
    for (double g : gammas) {
        const auto grid = log_spaced(1.0, std::nextafter(1e6, 0.0), 400);
        for (double eps : grid) {
            ++probes;
            const double eta = eta_from_eps_c(eps, g);
            worst_eta = std::max(worst_eta, eta);
            in_range += (eta >= 1.0 - g && eta < 1.0) ? 1 : 0;
        }
    }
    r.check(in_range == probes,
            fmt("eta_from_eps_c inside [1 - gamma, 1) for %zu/%zu eps_c in [1, 1e6), largest eta %.17g", in_range,
                probes, worst_eta));
    return r;
}

// ---------------------------------------------------------------------------

double safe_deviation(double d) { return std::isfinite(d) ? d : std::numeric_limits<double>::infinity(); }

Outcome c4_pc_asymptotics() {
    Outcome r;
    std::vector<double> devs;
    const std::vector<std::size_t> ns{4, 8, 16, 32, 64, 128};
    for (std::size_t n : ns) {
        const auto sched = NoiseSchedule::build_geometric(1.0, 0.01, n);
        const auto rep = consistency_report(*kPointMass, sched, {Scheme::PredictorCorrector, 1.0});
        devs.push_back(rep.max_deviation);
        r.note(fmt("PC predictor N=%zu gamma=%.5f max deviation %.5f (1/gamma - 1 = %.5f)", n, sched.gamma(),
                   rep.max_deviation, 1.0 / sched.gamma() - 1.0));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < devs.size(); ++k) monotone = monotone && devs[k] < devs[k - 1];
    r.check(monotone, "PC predictor max deviation strictly decreasing over N = 4 .. 128");
    r.check(devs.back() <= 0.01, fmt("PC predictor max deviation at N=128 is %.5f (<= 0.01)", devs.back()));

    const auto sched8 = NoiseSchedule::build_geometric(1.0, 0.01, 8);
    double best = std::numeric_limits<double>::infinity(), best_eps = 0.0;
    for (double eps : log_spaced(1e-8, 1e2, 1001)) {
        const auto rep = consistency_report(*kPointMass, sched8, {Scheme::Als, eps});
        const double d = safe_deviation(rep.max_deviation);
        if (d < best) {
            best = d;
            best_eps = eps;
        }
    }
    r.check(best > 0.05, fmt("ALS N=8: smallest max deviation over 1001 eps_a in [1e-8, 1e2] is %.4f at eps_a=%.4g "
                             "(> 0.05)",
                             best, best_eps));
    return r;
}

// ---------------------------------------------------------------------------

struct SweepSummary {
    std::map<std::size_t, double> best_eps;
    std::map<std::size_t, std::size_t> domain_errors;
    std::map<std::size_t, std::size_t> ok_cells;
};

SweepSummary summarize(const std::vector<SweepRow>& rows) {
    SweepSummary s;
    std::map<std::size_t, double> best_q;
    for (const auto& row : rows) {
        if (row.status == "domain_error") ++s.domain_errors[row.n];
        if (!row.q) continue;
        ++s.ok_cells[row.n];
        if (!best_q.count(row.n) || *row.q > best_q[row.n]) {
            best_q[row.n] = *row.q;
            s.best_eps[row.n] = row.epsilon;
        }
    }
    return s;
}

Outcome c5_sweep_phenomenology() {
    Outcome r;
    const auto t0 = Clock::now();
    SweepSpec base;
    base.oracle = "noisy:points:-1,0.8;1,0.2:0.1:11";
    base.dim = 1;
    base.sigma_first = 1.0;
    base.sigma_last = 0.01;
    base.n_values = {4, 8, 32, 128};
    base.chains = 2000;
    base.seed = 2021;
    base.metric = SweepMetric::W1;
    r.note("oracle " + base.oracle + ", sigma 1 -> 0.01, 2000 chains per cell, W1 quality");

    SweepSpec b = base;
    b.scheme = Scheme::CasEpsB;
    b.epsilons = log_spaced(1e-6, 3e-4, 31);  // eta = eps_b / sigma_N^2 from 0.01 to 3
    const auto sb = summarize(run_sweep(b));

    SweepSpec c = base;
    c.scheme = Scheme::CasEpsC;
    c.epsilons = log_spaced(1.0, 100.0, 31);
    const auto sc = summarize(run_sweep(c));

    for (std::size_t n : base.n_values) {
        r.note(fmt("N=%-3zu best eps_b %.4g (%zu ok, %zu domain errors)   best eps_c %.4g (%zu ok, %zu domain errors)",
                   n, sb.best_eps.count(n) ? sb.best_eps.at(n) : std::nan(""), sb.ok_cells.count(n) ? sb.ok_cells.at(n) : 0,
                   sb.domain_errors.count(n) ? sb.domain_errors.at(n) : 0,
                   sc.best_eps.count(n) ? sc.best_eps.at(n) : std::nan(""), sc.ok_cells.count(n) ? sc.ok_cells.at(n) : 0,
                   sc.domain_errors.count(n) ? sc.domain_errors.at(n) : 0));
    }

    const bool have_b = sb.best_eps.count(8) && sb.best_eps.count(128);
    const double shift = have_b ? std::max(sb.best_eps.at(8), sb.best_eps.at(128)) /
                                      std::min(sb.best_eps.at(8), sb.best_eps.at(128))
                                : 0.0;
    r.check(shift >= 10.0, fmt("best eps_b shifts %.2fx between N=8 and N=128 (>= 10x)", shift));
    const std::size_t b_err4 = sb.domain_errors.count(4) ? sb.domain_errors.at(4) : 0;
    r.check(b_err4 >= 1, fmt("%zu eps_b cells at N=4 report domain_error (>= 1)", b_err4));

    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool have_c = true;
    for (std::size_t n : {8, 32, 128}) {
        if (!sc.best_eps.count(n)) {
            have_c = false;
            continue;
        }
        lo = std::min(lo, sc.best_eps.at(n));
        hi = std::max(hi, sc.best_eps.at(n));
    }
    r.check(have_c && hi / lo <= 2.0, fmt("best eps_c spans a %.2fx band over N = 8, 32, 128 (<= 2x)", hi / lo));
    std::size_t c_err = 0;
    for (const auto& [n, k] : sc.domain_errors) c_err += k;
    r.check(c_err == 0, fmt("%zu eps_c cells report domain_error (0 expected)", c_err));

    const double t = seconds_since(t0);
    r.check(t < 300.0, fmt("sweep runtime %.1f s (< 300 s)", t));
    return r;
}

// ---------------------------------------------------------------------------

Outcome c6_gaussian_quality() {
    Outcome r;
    const auto target = std::make_shared<GaussianOracle>(Vec{0.0}, 1.0);
    const auto sched = NoiseSchedule::build_geometric(1.0, 0.01, 32);
    const std::size_t chains = 10000;

    SamplerConfig cfg{Scheme::CasEpsC, 2.0};
    EnsembleOptions opts;
    opts.chains = chains;
    opts.seed = 6;
    const auto plain = run_ensemble(*target, sched, cfg, opts);
    Vec xs;
    for (const auto& v : plain.finite_final_states()) xs.push_back(v[0]);
    const double w2 = w2_empirical_1d(xs, gaussian_quantiles(0.0, 1.0, xs.size()));
    const auto predicted = propagate(*target, sched, cfg, {Vec{0.0}, 1.0}).back();
    r.check(w2 <= 0.05, fmt("W2(final, N(0,1)) = %.4f over %zu chains (<= 0.05)", w2, xs.size()));
    r.note(fmt("affine prediction of the final law: N(%.3g, %.5f), closed-form W2 to N(0,1) %.4f", predicted.mean[0],
               predicted.variance, w2_gaussian_closed(predicted.mean[0], std::sqrt(predicted.variance), 0.0, 1.0)));

    cfg.final_denoise = true;
    const auto denoised = run_ensemble(*target, sched, cfg, opts);
    const auto pred_fd = propagate(*target, sched, cfg, {Vec{0.0}, 1.0}).back();
    double m = 0.0, v = 0.0, v_plain = 0.0;
    const auto fd_states = denoised.finite_final_states();
    for (const auto& s : fd_states) m += s[0];
    m /= static_cast<double>(fd_states.size());
    for (const auto& s : fd_states) v += (s[0] - m) * (s[0] - m);
    v /= static_cast<double>(fd_states.size() - 1);
    double mp = 0.0;
    for (double x : xs) mp += x;
    mp /= static_cast<double>(xs.size());
    for (double x : xs) v_plain += (x - mp) * (x - mp);
    v_plain /= static_cast<double>(xs.size() - 1);
    const double rel = std::abs(v / pred_fd.variance - 1.0);
    r.check(v < v_plain, fmt("final denoise contracts the variance: %.5f -> %.5f", v_plain, v));
    r.check(rel <= 0.02,
            fmt("denoised variance %.5f vs affine prediction %.5f, relative gap %.4f (<= 0.02)", v, pred_fd.variance, rel));
    return r;
}

// ---------------------------------------------------------------------------

Outcome c7_oracle_validity() {
    Outcome r;
    const std::vector<std::pair<std::string, OraclePtr>> oracles{
        {"gauss dim 3", std::make_shared<GaussianOracle>(Vec{0.5, -1.0, 2.0}, 0.7)},
        {"points dim 2",
         std::make_shared<PointCloudOracle>(std::vector<Vec>{{-1.0, 0.0}, {1.0, 0.5}, {0.2, -2.0}}, Vec{0.5, 0.3, 0.2})},
        {"points dim 1", std::make_shared<PointCloudOracle>(std::vector<Vec>{{-1.0}, {1.0}}, Vec{0.8, 0.2})},
    };
    NormalStream rng(77, 0);
    for (const auto& [name, o] : oracles) {
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            const double sigma = std::exp(std::log(0.05) + (std::log(5.0) - std::log(0.05)) * (k + 0.5) / 100.0);
            Vec x = rng.next(o->dim());
            for (double& v : x) v *= 2.0;
            const Vec s = o->score(x, sigma);
            for (std::size_t j = 0; j < x.size(); ++j) {
                // Richardson-extrapolated central difference.
                auto central = [&](double h) {
                    Vec a = x, b = x;
                    a[j] += h;
                    b[j] -= h;
                    return (o->log_density(a, sigma) - o->log_density(b, sigma)) / (2.0 * h);
                };
                const double h = 1e-3 * sigma;
                const double fd = (4.0 * central(h / 2.0) - central(h)) / 3.0;
                worst = std::max(worst, std::abs(fd - s[j]) / std::max(1.0, std::abs(s[j])));
            }
        }
        r.check(worst <= 1e-6, fmt("%s: finite-difference gradient vs score, worst error %.3g (<= 1e-6)", name.c_str(),
                                   worst));
    }

    const auto affine = std::make_shared<GaussianOracle>(Vec{0.5, -0.3}, 0.7);
    const auto sched = NoiseSchedule::build_geometric(1.0, 0.01, 16);
    const std::size_t chains = 100000;
    std::vector<SamplerConfig> configs{
        {Scheme::Als, 0.01},
        {Scheme::CasEpsB, 0.5 * 0.01 * 0.01},
        {Scheme::CasEpsC, 2.0, 0, true},
        {Scheme::PredictorCorrector, 0.01, 1},
        {Scheme::DenoiseInterp, 1.0},
        {Scheme::NoiseDenoise, 1.0},
    };
    for (const auto& cfg : configs) {
        const auto states = propagate(*affine, sched, cfg, {Vec(2, 0.0), 1.0});
        EnsembleOptions opts;
        opts.chains = chains;
        opts.seed = 700 + static_cast<std::uint64_t>(cfg.scheme);
        opts.dim = 2;
        opts.keep_final_states = false;
        opts.step_moments = true;
        const auto mc = run_ensemble(*affine, sched, cfg, opts);
        // Ends of levels 4 and 8 plus the final state.
        const auto ends = level_end_steps(mc.plan, sched.size());
        std::vector<std::size_t> checkpoints{ends[3], ends[7], states.size() - 1};
        double worst_z = 0.0;
        for (std::size_t k : checkpoints) {
            const auto& an = states[k];
            const auto& em = mc.moments[k + 1];
            const double n = static_cast<double>(em.count);
            for (std::size_t j = 0; j < 2; ++j) {
                const double se = std::sqrt(an.variance / n);
                worst_z = std::max(worst_z, std::abs(em.mean[j] - an.mean[j]) / se);
            }
            // Pooled over two independent components: 2 (n - 1) degrees of freedom.
            const double se_var = an.variance * std::sqrt(2.0 / (2.0 * (n - 1.0)));
            worst_z = std::max(worst_z, std::abs(em.variance - an.variance) / se_var);
        }
        r.check(worst_z <= 3.0, fmt("%-14s Monte Carlo vs analytic, worst |z| %.2f over mean and variance at 3 "
                                    "checkpoints (<= 3)",
                                    std::string(scheme_name(cfg.scheme)).c_str(), worst_z));
    }
    return r;
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* title;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"C1", "CAS consistency on a point mass", c1_cas_consistency},
        {"C2", "scheme equivalences at 1e-12", c2_equivalences},
        {"C3", "eta boundaries and amplification warning", c3_boundaries},
        {"C4", "PC asymptotic consistency, ALS inconsistency", c4_pc_asymptotics},
        {"C5", "eps_b / eps_c tuning phenomenology", c5_sweep_phenomenology},
        {"C6", "end-to-end Gaussian sampling quality", c6_gaussian_quality},
        {"C7", "oracle validity and Monte Carlo vs analytic", c7_oracle_validity},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.check(false, std::string("exception: ") + e.what());
        }
        std::printf("[%s] %s %s (%.1f s)\n", o.passed ? "PASS" : "FAIL", c.id, c.title, seconds_since(t0));
        for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        failed += o.passed ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
