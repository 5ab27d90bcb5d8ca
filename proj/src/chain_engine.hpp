// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>

#include "scorelab/oracle.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/sampler.hpp"

namespace scorelab::detail {

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// Draw 0 of the stream is reserved for x_0, whether or not it is used.
inline void initialize_state(NormalStream& stream, double sigma_first, const std::optional<Vec>& x0,
                             Vec& x) {
    if (x0) {
        x = *x0;
        stream.skip();
        return;
    }
    stream.next(std::span<double>(x));
    for (double& v : x) v *= sigma_first;
}

// Walks a plan from state `x`. `on_step(k, spec, before, after, drew)` sees
// every step, including a final non-finite one. Returns false on divergence;
// `x` then holds the non-finite state.
template <class Observer>
bool drive_chain(const StepPlan& plan, const ScoreOracle& o, NormalStream& stream, Vec& x, Vec& next,
                 Vec& z, Observer&& on_step) {
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
        const StepSpec& step = plan.steps[k];
        std::span<const double> noise;
        if (step.draws) {
            stream.next(std::span<double>(z));
            noise = z;
        }
        apply_step(step, o, x, noise, next);
        const bool finite = all_finite(next);
        on_step(k, step, std::as_const(x), std::as_const(next), step.draws);
        std::swap(x, next);
        if (!finite) return false;
    }
    return true;
}

}  // namespace scorelab::detail
