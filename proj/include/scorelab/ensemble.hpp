// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "scorelab/oracle.hpp"
#include "scorelab/sampler.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

// Moments of the chain states at one step, pooled over components:
// variance is the unbiased per-component variance averaged over components.
struct StepMoments {
    Vec mean;
    double variance = 0.0;
    std::size_t count = 0;  // chains still finite at this step
};

struct EnsembleOptions {
    std::size_t chains = 1;
    std::uint64_t seed = 0;
    std::size_t dim = 1;
    std::optional<Vec> x0;
    bool keep_final_states = true;
    bool step_moments = false;
    std::size_t threads = 0;  // 0: hardware concurrency
};

struct EnsembleResult {
    StepPlan plan;
    // One entry per chain, in chain order; diverged chains keep their last state.
    std::vector<Vec> final_states;
    std::vector<char> diverged;
    std::size_t n_diverged = 0;
    // moments[0] is x_0, moments[k + 1] the state after plan step k.
    std::vector<StepMoments> moments;

    // Final states of the chains that stayed finite.
    std::vector<Vec> finite_final_states() const;
};

// Runs chains 0..chains-1 of the (seed, chain) streams. Chains are processed
// in fixed blocks and merged in block order, so results do not depend on the
// thread count. Throws like plan_steps before any chain runs.
EnsembleResult run_ensemble(const ScoreOracle& o, const NoiseSchedule& s, const SamplerConfig& cfg,
                            const EnsembleOptions& opts);

}  // namespace scorelab
