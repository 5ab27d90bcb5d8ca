// SPDX-License-Identifier: Apache-2.0
#include "scorelab/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scorelab/errors.hpp"

namespace scorelab {

std::vector<GaussianState> propagate(const ScoreOracle& o, const NoiseSchedule& s,
                                     const SamplerConfig& cfg, const GaussianState& init) {
    if (!o.is_affine()) throw UnsupportedOperation("analytic propagation needs an affine score");
    if (init.mean.size() != o.dim()) throw LengthMismatch("initial mean does not match the oracle");
    if (!(init.variance >= 0.0)) throw DomainError("initial variance must be non-negative");

    const StepPlan plan = plan_steps(s, cfg);
    std::vector<GaussianState> states;
    states.reserve(plan.steps.size());
    GaussianState cur = init;
    for (const StepSpec& step : plan.steps) {
        const AffineScore a = *o.affine(step.sigma);
        const double drift = step.drift_coefficient();
        const double noise = step.noise_coefficient();
        const double contraction = 1.0 + drift * a.slope;
        for (std::size_t j = 0; j < cur.mean.size(); ++j) {
            cur.mean[j] = contraction * cur.mean[j] + drift * a.offset[j];
        }
        cur.variance = contraction * contraction * cur.variance + noise * noise;
        states.push_back(cur);
    }
    return states;
}

std::vector<std::size_t> level_end_steps(const StepPlan& plan, std::size_t levels) {
    std::vector<std::size_t> ends(levels, 0);
    std::vector<bool> seen(levels, false);
    for (std::size_t k = 0; k < plan.steps.size(); ++k) {
        const StepSpec& st = plan.steps[k];
        if (st.kind == StepKind::FinalDenoise) continue;
        if (st.level == 0 || st.level > levels) throw LengthMismatch("plan visits more levels than requested");
        ends[st.level - 1] = k;
        seen[st.level - 1] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
        throw LengthMismatch("plan does not visit every level");
    }
    return ends;
}

ConsistencyReport make_consistency_report(const NoiseSchedule& s, std::span<const double> tau) {
    if (tau.size() != s.size()) throw LengthMismatch("one effective noise level per schedule level required");
    ConsistencyReport r;
    for (std::size_t i = 1; i <= s.size(); ++i) {
        const double target = s.extended_sigma(i + 1);
        const double dev = std::abs(tau[i - 1] / target - 1.0);
        r.step.push_back(i);
        r.sigma_prescribed.push_back(target);
        r.tau_effective.push_back(tau[i - 1]);
        r.rel_deviation.push_back(dev);
        // NaN deviations (diverged variance) must dominate the maximum.
        r.max_deviation = std::isnan(dev) || std::isnan(r.max_deviation) ? std::numeric_limits<double>::quiet_NaN() : std::max(r.max_deviation, dev);
    }
    return r;
}

bool is_point_mass(const ScoreOracle& o) {
    for (double sigma : {1e-3, 1.0, 1e3}) {
        const auto a = o.affine(sigma);
        if (!a) return false;
        if (std::abs(a->slope * sigma * sigma + 1.0) > 1e-12) return false;
    }
    return true;
}

ConsistencyReport consistency_report(const ScoreOracle& o, const NoiseSchedule& s,
                                     const SamplerConfig& cfg) {
    if (!o.is_affine()) throw UnsupportedOperation("consistency report needs an affine score");
    if (!is_point_mass(o)) {
        throw UnsupportedOperation("effective noise is only defined for point-mass oracles (data_std 0)");
    }
    const GaussianState init{Vec(o.dim(), 0.0), s.sigma_first() * s.sigma_first()};
    const auto states = propagate(o, s, cfg, init);
    const auto ends = level_end_steps(plan_steps(s, cfg), s.size());
    std::vector<double> tau;
    tau.reserve(ends.size());
    for (std::size_t k : ends) tau.push_back(std::sqrt(states[k].variance));
    return make_consistency_report(s, tau);
}

}  // namespace scorelab
