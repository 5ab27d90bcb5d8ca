// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorelab/oracle.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

enum class Scheme {
    Als,                 // annealed Langevin, epsilon = eps_a
    CasEpsB,             // consistent annealed, eta = eps_b / sigma_N^2
    CasEpsC,             // consistent annealed, eta = 1 - gamma^eps_c
    PredictorCorrector,  // VE predictor plus M Langevin corrector steps
    DenoiseInterp,       // gamma x + (1 - gamma) H(x, sigma_i)
    NoiseDenoise,        // H(x, sigma_i) + sigma_{i+1} z
};

std::string_view scheme_name(Scheme s);
// Accepts the names produced by scheme_name ("als", "cas-b", "cas-c", "pc",
// "denoise-interp", "noise-denoise").
std::optional<Scheme> parse_scheme(std::string_view name);

struct SamplerConfig {
    Scheme scheme = Scheme::CasEpsC;
    double epsilon = 1.0;
    std::size_t corrector_steps = 0;  // PC only
    bool final_denoise = false;
    std::size_t steps_per_level = 1;  // ALS only
    // ALS step alpha = eps_a (sigma_i / sigma_N)^2 instead of eps_a sigma_i / sigma_N.
    bool als_alpha_squared = false;

    // Throws DomainError for non-positive epsilon (where used), eps_c < 1 or
    // steps_per_level == 0.
    void validate() const;
    bool operator==(const SamplerConfig&) const = default;
};

// --- hyper-parameter maps --------------------------------------------------

double eta_from_eps_b(double eps_b, double sigma_last);
// eta = 1 - gamma^eps_c, in [1 - gamma, 1) for eps_c >= 1.
double eta_from_eps_c(double eps_c, double gamma);

struct BetaResult {
    double beta;
    // eta > 1: admissible, but the drift overshoots the denoised sample and
    // the remaining noise is amplified every step.
    bool amplifies;
};

// beta = sqrt(1 - ((1 - eta) / gamma)^2). Throws DomainError when eta lies
// outside [1 - gamma, 1 + gamma]. Inside the bounds, round-off within a few
// ulps of an edge is snapped to beta = 0.
BetaResult beta_of_eta(double eta, double gamma);

// Same beta evaluated through eps_c directly: (1 - eta) / gamma = gamma^(eps_c - 1),
// so beta is exactly 0 at eps_c = 1 instead of sqrt of a rounding residue.
double beta_from_eps_c(double eps_c, double gamma);

double als_alpha(double eps_a, double sigma_i, double sigma_last, bool squared = false);

// --- single steps ----------------------------------------------------------
// Pure functions of their inputs. z is a standard normal draw of the state's
// dimension.

// x + alpha s(x, sigma_i) + sqrt(2 alpha) z with alpha = als_alpha(...).
Vec als_step(const ScoreOracle& o, std::span<const double> x, double sigma_i, double sigma_last,
             double eps_a, std::span<const double> z);
Vec langevin_step(const ScoreOracle& o, std::span<const double> x, double sigma, double alpha,
                  std::span<const double> z);
// x + eta sigma_i^2 s(x, sigma_i) + beta sigma_next z
Vec cas_step(const ScoreOracle& o, std::span<const double> x, double sigma_i, double sigma_next,
             double eta, double beta, std::span<const double> z);
// x + (sigma_i^2 - sigma_next^2) s(x, sigma_i) + sqrt(sigma_i^2 - sigma_next^2) z
Vec pc_predictor_step(const ScoreOracle& o, std::span<const double> x, double sigma_i,
                      double sigma_next, std::span<const double> z);
// gamma x + (1 - gamma) H(x, sigma_i)
Vec denoise_interp_step(const ScoreOracle& o, std::span<const double> x, double sigma_i, double gamma);
// H(x, sigma_i) + sigma_next z
Vec noise_denoise_step(const ScoreOracle& o, std::span<const double> x, double sigma_i,
                       double sigma_next, std::span<const double> z);
// H(x, sigma_last)
Vec final_denoise_step(const ScoreOracle& o, std::span<const double> x, double sigma_last);

// --- step plans --------------------------------------------------------------

enum class StepKind { Langevin, Consistent, Predictor, DenoiseInterp, NoiseDenoise, FinalDenoise };

std::string_view step_kind_name(StepKind k);

// One step of a chain with all of its scalar parameters resolved. Both the
// sampler and the analytic propagation walk the same list of these.
struct StepSpec {
    StepKind kind;
    std::size_t level;  // 1-based noise level the score is evaluated at
    double sigma;       // sigma_i
    double sigma_next;  // sigma_{i+1}; for Langevin steps equal to sigma
    double step;        // alpha (Langevin), eta (Consistent), gamma (DenoiseInterp)
    double beta;        // Consistent only
    bool draws;         // consumes one normal vector from the chain's stream

    // x_out = x + drift * s(x, sigma) + noise * z, for every kind.
    double drift_coefficient() const;
    double noise_coefficient() const;
    // Trace fields: alpha for Langevin steps, otherwise drift / sigma^2 and
    // noise / sigma_next.
    double eta() const;
    double beta_equivalent() const;
};

struct StepPlan {
    std::vector<StepSpec> steps;
    // Scheme-wide eta and beta for the consistent variants.
    std::optional<double> eta;
    std::optional<double> beta;
    bool amplification_warning = false;
    std::size_t draws = 0;  // noise draws per chain, excluding the initial state
};

// Throws DomainError on invalid configs, including beta domain errors, before
// anything runs.
StepPlan plan_steps(const NoiseSchedule& s, const SamplerConfig& cfg);

// Applies one planned step; `out` may not alias `x`.
void apply_step(const StepSpec& step, const ScoreOracle& o, std::span<const double> x,
                std::span<const double> z, std::span<double> out);

// --- chains ------------------------------------------------------------------

struct StepRecord {
    std::size_t index;  // 0-based position in the chain
    std::size_t level;
    StepKind kind;
    double sigma_i;
    double sigma_next;
    double eta;   // alpha for Langevin steps
    double beta;  // NaN for Langevin steps
    Vec state_before;
    Vec state_after;
    bool noise_draw_consumed;
};

struct ChainTrace {
    SamplerConfig config;
    NoiseSchedule schedule;
    std::string oracle;
    std::uint64_t seed;
    std::uint64_t chain;
    Vec initial_state;
    std::vector<StepRecord> steps;
    Vec final_state;
    bool diverged = false;
    bool amplification_warning = false;
};

// Runs one chain. Draw 0 of stream (seed, chain) initializes x_0 ~ N(0, sigma_1^2 I)
// unless x0 is given (draw 0 is then skipped); every noise-consuming step takes
// the next draw. Stops at the first non-finite state and flags divergence.
ChainTrace run_chain(const ScoreOracle& o, const NoiseSchedule& s, const SamplerConfig& cfg,
                     std::uint64_t seed, std::size_t dim, std::optional<Vec> x0 = std::nullopt,
                     std::uint64_t chain = 0);

// Number of records a completed chain produces.
std::size_t expected_step_count(const NoiseSchedule& s, const SamplerConfig& cfg);

}  // namespace scorelab
