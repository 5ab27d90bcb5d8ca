// SPDX-License-Identifier: Apache-2.0
#include "scorelab/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>

#include "scorelab/oracle.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// |a - b| relative to the largest magnitude involved in the step.
double rel_error(std::span<const double> a, std::span<const double> b, std::span<const double> x) {
    double diff = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) diff = std::max(diff, std::abs(a[j] - b[j]));
    if (std::isnan(diff)) return diff;
    const double scale = std::max({inf_norm(a), inf_norm(b), inf_norm(x), 1e-300});
    return diff / scale;
}

double ratio_error(double got, double want) { return std::abs(got / want - 1.0); }

// Coefficient multiplying z in component 0, read off the step itself.
template <class Step>
double noise_coefficient(Step&& step, std::span<const double> x) {
    Vec zero(x.size(), 0.0);
    Vec unit(x.size(), 0.0);
    unit[0] = 1.0;
    return step(unit)[0] - step(zero)[0];
}

OraclePtr make_test_oracle(std::size_t dim, std::uint64_t seed) {
    NormalStream stream(seed, 0xC10DULL);
    std::vector<Vec> points;
    for (int k = 0; k < 3; ++k) points.push_back(stream.next(dim));
    auto cloud = std::make_shared<PointCloudOracle>(std::move(points), Vec{0.5, 0.3, 0.2});
    return std::make_shared<NoisyOracle>(std::move(cloud), 0.3, seed);
}

}  // namespace

std::vector<IdentityCheck> verify_equivalences(const EquivalenceOptions& opts) {
    std::vector<IdentityCheck> checks;
    for (double gamma_target : opts.gammas) {
        for (std::size_t dim : opts.dims) {
            const auto sched = NoiseSchedule::build_geometric(
                1.0, std::pow(gamma_target, static_cast<double>(opts.levels - 1)), opts.levels);
            const double gamma = sched.gamma();
            const OraclePtr oracle = make_test_oracle(dim, opts.seed);
            const ScoreOracle& o = *oracle;
            NormalStream stream(opts.seed, static_cast<std::uint64_t>(dim) * 1000003ULL +
                                               static_cast<std::uint64_t>(gamma_target * 1e6));

            const double eta2 = eta_from_eps_c(2.0, gamma);
            const double beta2 = beta_from_eps_c(2.0, gamma) + opts.beta_fault;
            const double eta_lo = eta_from_eps_c(1.0, gamma);
            const double beta_lo = beta_from_eps_c(1.0, gamma) + opts.beta_fault;
            const double beta_hi = beta_of_eta(1.0, gamma).beta + opts.beta_fault;

            double eq8 = 0.0, als_ratio = 0.0, pc_det = 0.0, pc_ratio = 0.0, interp = 0.0, nd = 0.0;
            for (std::size_t i = 1; i <= sched.size(); ++i) {
                const double sig = sched.extended_sigma(i);
                const double sig_next = sched.extended_sigma(i + 1);
                for (std::size_t k = 0; k < opts.samples_per_level; ++k) {
                    Vec x = stream.next(dim);
                    for (double& v : x) v *= 2.0 * sig;
                    const Vec z = stream.next(dim);
                    const Vec zero(dim, 0.0);
                    const Vec s = o.score(x, sig);

                    // Rewritten CAS with eps_c = 2.
                    const Vec cas2 = cas_step(o, x, sig, sig_next, eta2, beta2, z);
                    Vec rewritten(dim);
                    const double alpha_prime = eta2 * sig * sig;
                    for (std::size_t j = 0; j < dim; ++j) {
                        rewritten[j] = x[j] + alpha_prime * s[j] + gamma * std::sqrt(alpha_prime) * z[j];
                    }
                    eq8 = std::max(eq8, rel_error(cas2, rewritten, x));

                    const double cas_noise = noise_coefficient(
                        [&](const Vec& zz) { return cas_step(o, x, sig, sig_next, eta2, beta2, zz); }, x);
                    const double als_noise = noise_coefficient(
                        [&](const Vec& zz) { return langevin_step(o, x, sig, alpha_prime, zz); }, x);
                    als_ratio = std::max(als_ratio, ratio_error(cas_noise / als_noise, gamma / std::sqrt(2.0)));

                    const Vec cas_det = cas_step(o, x, sig, sig_next, eta2, beta2, zero);
                    const Vec pc = pc_predictor_step(o, x, sig, sig_next, zero);
                    pc_det = std::max(pc_det, rel_error(cas_det, pc, x));
                    const double pc_noise = noise_coefficient(
                        [&](const Vec& zz) { return pc_predictor_step(o, x, sig, sig_next, zz); }, x);
                    pc_ratio = std::max(pc_ratio, ratio_error(cas_noise / pc_noise, gamma));

                    const Vec cas_lo = cas_step(o, x, sig, sig_next, eta_lo, beta_lo, z);
                    interp = std::max(interp, rel_error(cas_lo, denoise_interp_step(o, x, sig, gamma), x));

                    const Vec cas_hi = cas_step(o, x, sig, sig_next, 1.0, beta_hi, z);
                    nd = std::max(nd, rel_error(cas_hi, noise_denoise_step(o, x, sig, sig_next, z), x));
                }
            }

            // Whole chains with shared streams. The hashed perturbation turns a one-ulp state
            // difference into a fresh draw, so chains run on the unperturbed cloud.
            const ScoreOracle& smooth = base_oracle(o);
            double align = 0.0;
            auto compare_chains = [&](const SamplerConfig& a, const SamplerConfig& b) {
                const auto ta = run_chain(smooth, sched, a, opts.seed, dim);
                const auto tb = run_chain(smooth, sched, b, opts.seed, dim);
                if (ta.steps.size() != tb.steps.size() || ta.initial_state != tb.initial_state) {
                    align = std::numeric_limits<double>::infinity();
                    return;
                }
                for (std::size_t k = 0; k < ta.steps.size(); ++k) {
                    if (ta.steps[k].noise_draw_consumed != tb.steps[k].noise_draw_consumed) {
                        align = std::numeric_limits<double>::infinity();
                        return;
                    }
                    align = std::max(align, rel_error(ta.steps[k].state_after, tb.steps[k].state_after,
                                                      ta.steps[k].state_before));
                }
            };
            SamplerConfig lo{Scheme::CasEpsC, 1.0};
            SamplerConfig interp_cfg{Scheme::DenoiseInterp, 1.0};
            SamplerConfig hi{Scheme::CasEpsB, sched.sigma_last() * sched.sigma_last()};
            SamplerConfig nd_cfg{Scheme::NoiseDenoise, 1.0};
            compare_chains(lo, interp_cfg);
            compare_chains(hi, nd_cfg);

            auto push = [&](const char* name, double err) {
                checks.push_back({name, gamma_target, dim, err, err <= opts.tolerance});
            };
            push("eq8-form", eq8);
            push("als-noise-ratio", als_ratio);
            push("pc-deterministic", pc_det);
            push("pc-noise-ratio", pc_ratio);
            push("denoise-interp", interp);
            push("noise-denoise", nd);
            push("stream-alignment", align);
        }
    }
    return checks;
}

}  // namespace scorelab
