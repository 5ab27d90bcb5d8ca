// SPDX-License-Identifier: Apache-2.0
#include "scorelab/sampler.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "chain_engine.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/rng.hpp"

namespace scorelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// |r^2 - 1| below this at the eta boundaries is round-off, not a violation.
constexpr double kBoundarySnap = 8.0 * DBL_EPSILON;

void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Vec run_single(const StepSpec& step, const ScoreOracle& o, std::span<const double> x,
               std::span<const double> z) {
    if (step.draws && z.size() != x.size()) throw LengthMismatch("noise draw dimension mismatch");
    Vec out(x.size());
    apply_step(step, o, x, z, out);
    return out;
}

}  // namespace

std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::Als: return "als";
        case Scheme::CasEpsB: return "cas-b";
        case Scheme::CasEpsC: return "cas-c";
        case Scheme::PredictorCorrector: return "pc";
        case Scheme::DenoiseInterp: return "denoise-interp";
        case Scheme::NoiseDenoise: return "noise-denoise";
    }
    return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
    for (Scheme s : {Scheme::Als, Scheme::CasEpsB, Scheme::CasEpsC, Scheme::PredictorCorrector,
                     Scheme::DenoiseInterp, Scheme::NoiseDenoise}) {
        if (scheme_name(s) == name) return s;
    }
    return std::nullopt;
}

std::string_view step_kind_name(StepKind k) {
    switch (k) {
        case StepKind::Langevin: return "langevin";
        case StepKind::Consistent: return "consistent";
        case StepKind::Predictor: return "predictor";
        case StepKind::DenoiseInterp: return "denoise-interp";
        case StepKind::NoiseDenoise: return "noise-denoise";
        case StepKind::FinalDenoise: return "final-denoise";
    }
    return "unknown";
}

void SamplerConfig::validate() const {
    const bool uses_epsilon = scheme == Scheme::Als || scheme == Scheme::CasEpsB ||
                              scheme == Scheme::CasEpsC ||
                              (scheme == Scheme::PredictorCorrector && corrector_steps > 0);
    if (uses_epsilon && !(epsilon > 0.0 && std::isfinite(epsilon))) {
        throw DomainError("epsilon must be positive and finite");
    }
    if (scheme == Scheme::CasEpsC && !(epsilon >= 1.0)) {
        throw DomainError("eps_c must be >= 1, got " + fmt(epsilon));
    }
    if (steps_per_level == 0) throw DomainError("steps_per_level must be at least 1");
}

double eta_from_eps_b(double eps_b, double sigma_last) {
    if (!(eps_b > 0.0)) throw DomainError("eps_b must be positive");
    if (!(sigma_last > 0.0)) throw DomainError("sigma_N must be positive");
    return eps_b / (sigma_last * sigma_last);
}

double eta_from_eps_c(double eps_c, double gamma) {
    if (!(eps_c >= 1.0)) throw DomainError("eps_c must be >= 1, got " + fmt(eps_c));
    check_gamma(gamma);
    const double lower = 1.0 - gamma;
    if (eps_c == 1.0) return lower;
    const double eta = -std::expm1(eps_c * std::log(gamma));
    // gamma^eps_c > 0 for every finite eps_c; keep eta below 1 after rounding.
    return std::clamp(eta, lower, std::nextafter(1.0, 0.0));
}

BetaResult beta_of_eta(double eta, double gamma) {
    check_gamma(gamma);
    if (!std::isfinite(eta)) throw DomainError("eta must be finite");
    if (eta < 1.0 - gamma) {
        throw DomainError("eta = " + fmt(eta) + " violates 1 - gamma <= eta (1 - gamma = " + fmt(1.0 - gamma) + ")");
    }
    if (eta > 1.0 + gamma) {
        throw DomainError("eta = " + fmt(eta) + " violates eta <= 1 + gamma (1 + gamma = " + fmt(1.0 + gamma) + ")");
    }
    const double r = (1.0 - eta) / gamma;
    const double one_minus_r2 = (1.0 - r) * (1.0 + r);
    double beta = 0.0;
    if (one_minus_r2 > kBoundarySnap) beta = std::sqrt(one_minus_r2);
    return {beta, eta > 1.0};
}

double beta_from_eps_c(double eps_c, double gamma) {
    if (!(eps_c >= 1.0)) throw DomainError("eps_c must be >= 1, got " + fmt(eps_c));
    check_gamma(gamma);
    return std::sqrt(-std::expm1(2.0 * (eps_c - 1.0) * std::log(gamma)));
}

double als_alpha(double eps_a, double sigma_i, double sigma_last, bool squared) {
    if (!(eps_a > 0.0)) throw DomainError("eps_a must be positive");
    if (!(sigma_last > 0.0) || !(sigma_i >= sigma_last)) {
        throw DomainError("ALS needs sigma_i >= sigma_N > 0");
    }
    const double ratio = sigma_i / sigma_last;
    return eps_a * (squared ? ratio * ratio : ratio);
}

// --- StepSpec ------------------------------------------------------------------

double StepSpec::drift_coefficient() const {
    const double var = sigma * sigma;
    switch (kind) {
        case StepKind::Langevin: return step;
        case StepKind::Consistent: return step * var;
        case StepKind::Predictor: return var - sigma_next * sigma_next;
        case StepKind::DenoiseInterp: return (1.0 - step) * var;
        case StepKind::NoiseDenoise:
        case StepKind::FinalDenoise: return var;
    }
    return kNaN;
}

double StepSpec::noise_coefficient() const {
    switch (kind) {
        case StepKind::Langevin: return std::sqrt(2.0 * step);
        case StepKind::Consistent: return beta * sigma_next;
        case StepKind::Predictor: return std::sqrt(sigma * sigma - sigma_next * sigma_next);
        case StepKind::DenoiseInterp:
        case StepKind::FinalDenoise: return 0.0;
        case StepKind::NoiseDenoise: return sigma_next;
    }
    return kNaN;
}

double StepSpec::eta() const {
    if (kind == StepKind::Langevin) return step;
    return drift_coefficient() / (sigma * sigma);
}

double StepSpec::beta_equivalent() const {
    switch (kind) {
        case StepKind::Langevin: return kNaN;
        case StepKind::Consistent: return beta;
        case StepKind::Predictor: return noise_coefficient() / sigma_next;
        case StepKind::DenoiseInterp:
        case StepKind::FinalDenoise: return 0.0;
        case StepKind::NoiseDenoise: return 1.0;
    }
    return kNaN;
}

void apply_step(const StepSpec& step, const ScoreOracle& o, std::span<const double> x,
                std::span<const double> z, std::span<double> out) {
    o.score_into(x, step.sigma, out);
    const std::size_t d = x.size();
    const double var = step.sigma * step.sigma;
    switch (step.kind) {
        case StepKind::Langevin: {
            const double alpha = step.step;
            const double noise = std::sqrt(2.0 * alpha);
            for (std::size_t j = 0; j < d; ++j) out[j] = x[j] + alpha * out[j] + noise * z[j];
            break;
        }
        case StepKind::Consistent: {
            const double drift = step.step * var;
            const double noise = step.beta * step.sigma_next;
            for (std::size_t j = 0; j < d; ++j) out[j] = x[j] + drift * out[j] + noise * z[j];
            break;
        }
        case StepKind::Predictor: {
            const double delta = var - step.sigma_next * step.sigma_next;
            const double noise = std::sqrt(delta);
            for (std::size_t j = 0; j < d; ++j) out[j] = x[j] + delta * out[j] + noise * z[j];
            break;
        }
        case StepKind::DenoiseInterp: {
            const double gamma = step.step;
            for (std::size_t j = 0; j < d; ++j) {
                const double denoised = x[j] + var * out[j];
                out[j] = gamma * x[j] + (1.0 - gamma) * denoised;
            }
            break;
        }
        case StepKind::NoiseDenoise: {
            for (std::size_t j = 0; j < d; ++j) {
                const double denoised = x[j] + var * out[j];
                out[j] = denoised + step.sigma_next * z[j];
            }
            break;
        }
        case StepKind::FinalDenoise: {
            for (std::size_t j = 0; j < d; ++j) out[j] = x[j] + var * out[j];
            break;
        }
    }
}

// --- single-step wrappers ----------------------------------------------------

Vec langevin_step(const ScoreOracle& o, std::span<const double> x, double sigma, double alpha,
                  std::span<const double> z) {
    if (!(alpha >= 0.0)) throw DomainError("Langevin step size must be non-negative");
    return run_single({StepKind::Langevin, 0, sigma, sigma, alpha, kNaN, true}, o, x, z);
}

Vec als_step(const ScoreOracle& o, std::span<const double> x, double sigma_i, double sigma_last,
             double eps_a, std::span<const double> z) {
    return langevin_step(o, x, sigma_i, als_alpha(eps_a, sigma_i, sigma_last), z);
}

Vec cas_step(const ScoreOracle& o, std::span<const double> x, double sigma_i, double sigma_next,
             double eta, double beta, std::span<const double> z) {
    if (!(sigma_i > sigma_next && sigma_next > 0.0)) throw DomainError("CAS needs sigma_i > sigma_next > 0");
    return run_single({StepKind::Consistent, 0, sigma_i, sigma_next, eta, beta, true}, o, x, z);
}

Vec pc_predictor_step(const ScoreOracle& o, std::span<const double> x, double sigma_i,
                      double sigma_next, std::span<const double> z) {
    if (!(sigma_i >= sigma_next && sigma_next >= 0.0)) {
        throw DomainError("predictor needs sigma_i >= sigma_next >= 0");
    }
    return run_single({StepKind::Predictor, 0, sigma_i, sigma_next, kNaN, kNaN, true}, o, x, z);
}

Vec denoise_interp_step(const ScoreOracle& o, std::span<const double> x, double sigma_i, double gamma) {
    check_gamma(gamma);
    return run_single({StepKind::DenoiseInterp, 0, sigma_i, gamma * sigma_i, gamma, 0.0, false}, o, x, {});
}

Vec noise_denoise_step(const ScoreOracle& o, std::span<const double> x, double sigma_i,
                       double sigma_next, std::span<const double> z) {
    if (!(sigma_i > sigma_next && sigma_next > 0.0)) {
        throw DomainError("noise-denoise needs sigma_i > sigma_next > 0");
    }
    return run_single({StepKind::NoiseDenoise, 0, sigma_i, sigma_next, 1.0, 1.0, true}, o, x, z);
}

Vec final_denoise_step(const ScoreOracle& o, std::span<const double> x, double sigma_last) {
    return run_single({StepKind::FinalDenoise, 0, sigma_last, sigma_last, 1.0, 0.0, false}, o, x, {});
}

// --- plans -------------------------------------------------------------------

StepPlan plan_steps(const NoiseSchedule& s, const SamplerConfig& cfg) {
    cfg.validate();
    StepPlan plan;
    const std::size_t n = s.size();
    const double gamma = s.gamma();
    const double sigma_last = s.sigma_last();

    if (cfg.scheme == Scheme::CasEpsB) {
        plan.eta = eta_from_eps_b(cfg.epsilon, sigma_last);
        const BetaResult b = beta_of_eta(*plan.eta, gamma);
        plan.beta = b.beta;
        plan.amplification_warning = b.amplifies;
    } else if (cfg.scheme == Scheme::CasEpsC) {
        plan.eta = eta_from_eps_c(cfg.epsilon, gamma);
        plan.beta = beta_from_eps_c(cfg.epsilon, gamma);
    }

    auto langevin = [&](std::size_t level, double sigma) {
        const double alpha = als_alpha(cfg.epsilon, sigma, sigma_last, cfg.als_alpha_squared);
        plan.steps.push_back({StepKind::Langevin, level, sigma, sigma, alpha, kNaN, true});
    };

    for (std::size_t i = 1; i <= n; ++i) {
        const double sigma = s.extended_sigma(i);
        const double sigma_next = s.extended_sigma(i + 1);
        switch (cfg.scheme) {
            case Scheme::Als:
                for (std::size_t k = 0; k < cfg.steps_per_level; ++k) langevin(i, sigma);
                break;
            case Scheme::CasEpsB:
            case Scheme::CasEpsC:
                plan.steps.push_back({StepKind::Consistent, i, sigma, sigma_next, *plan.eta, *plan.beta, true});
                break;
            case Scheme::PredictorCorrector:
                plan.steps.push_back({StepKind::Predictor, i, sigma, sigma_next, kNaN, kNaN, true});
                for (std::size_t k = 0; k < cfg.corrector_steps; ++k) langevin(i, sigma);
                break;
            case Scheme::DenoiseInterp:
                // The draw is taken and discarded so streams line up with CAS.
                plan.steps.push_back({StepKind::DenoiseInterp, i, sigma, sigma_next, gamma, 0.0, true});
                break;
            case Scheme::NoiseDenoise:
                plan.steps.push_back({StepKind::NoiseDenoise, i, sigma, sigma_next, 1.0, 1.0, true});
                break;
        }
    }
    if (cfg.final_denoise) {
        plan.steps.push_back({StepKind::FinalDenoise, n, sigma_last, sigma_last, 1.0, 0.0, false});
    }
    for (const auto& st : plan.steps) plan.draws += st.draws ? 1 : 0;
    return plan;
}

std::size_t expected_step_count(const NoiseSchedule& s, const SamplerConfig& cfg) {
    std::size_t per_level = 1;
    if (cfg.scheme == Scheme::Als) per_level = cfg.steps_per_level;
    if (cfg.scheme == Scheme::PredictorCorrector) per_level = 1 + cfg.corrector_steps;
    return s.size() * per_level + (cfg.final_denoise ? 1 : 0);
}

ChainTrace run_chain(const ScoreOracle& o, const NoiseSchedule& s, const SamplerConfig& cfg,
                     std::uint64_t seed, std::size_t dim, std::optional<Vec> x0, std::uint64_t chain) {
    if (dim == 0) throw DomainError("dimension must be at least 1");
    if (dim != o.dim()) throw LengthMismatch("chain dimension does not match the oracle");
    if (x0 && x0->size() != dim) throw LengthMismatch("x0 dimension does not match");

    const StepPlan plan = plan_steps(s, cfg);

    ChainTrace trace{cfg, s, o.describe(), seed, chain, {}, {}, {}, false, plan.amplification_warning};
    NormalStream stream(seed, chain);
    Vec x(dim), next(dim), z(dim);
    detail::initialize_state(stream, s.sigma_first(), x0, x);
    trace.initial_state = x;
    trace.steps.reserve(plan.steps.size());

    const bool ok = detail::drive_chain(
        plan, o, stream, x, next, z,
        [&](std::size_t k, const StepSpec& st, const Vec& before, const Vec& after, bool drew) {
            trace.steps.push_back({k, st.level, st.kind, st.sigma, st.sigma_next, st.eta(),
                                   st.beta_equivalent(), before, after, drew});
        });
    trace.final_state = x;
    trace.diverged = !ok;
    return trace;
}

}  // namespace scorelab
