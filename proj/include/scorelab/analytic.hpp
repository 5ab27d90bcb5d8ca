// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "scorelab/oracle.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

// Isotropic Gaussian N(mean, variance I).
struct GaussianState {
    Vec mean;
    double variance = 0.0;
};

// Exact law of the chain state when the score is affine in x. Every planned
// step maps x to C x + d + e z, so
//   mean' = C mean + d,  variance' = C^2 variance + e^2,
// with C = 1 + drift * slope(sigma), d = drift * offset(sigma), e = noise.
// Returns one state per plan step. Throws UnsupportedOperation for non-affine
// oracles.
std::vector<GaussianState> propagate(const ScoreOracle& o, const NoiseSchedule& s,
                                     const SamplerConfig& cfg, const GaussianState& init);

// Effective noise tau_i after each noise level against the prescribed
// sigma_{i+1}.
struct ConsistencyReport {
    std::vector<std::size_t> step;  // level i, 1-based
    std::vector<double> sigma_prescribed;
    std::vector<double> tau_effective;
    std::vector<double> rel_deviation;  // |tau / sigma - 1|
    double max_deviation = 0.0;
};

// Plan index of the last step taken at each level (final denoise excluded).
std::vector<std::size_t> level_end_steps(const StepPlan& plan, std::size_t levels);

ConsistencyReport make_consistency_report(const NoiseSchedule& s, std::span<const double> tau);

// Analytic report from x_0 ~ N(0, sigma_1^2 I). The oracle must be a point
// mass (affine with slope -1 / sigma^2), so tau is the spread around it.
ConsistencyReport consistency_report(const ScoreOracle& o, const NoiseSchedule& s,
                                     const SamplerConfig& cfg);

// True if the oracle's score is that of a point mass at every sigma tested.
bool is_point_mass(const ScoreOracle& o);

}  // namespace scorelab
