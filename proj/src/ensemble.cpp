// SPDX-License-Identifier: Apache-2.0
#include "scorelab/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "chain_engine.hpp"
#include "scorelab/errors.hpp"

namespace scorelab {

namespace {

constexpr std::size_t kBlockSize = 512;

// Running mean and summed squared deviations, per component.
struct Accumulator {
    std::size_t count = 0;
    Vec mean;
    Vec m2;

    explicit Accumulator(std::size_t dim = 0) : mean(dim, 0.0), m2(dim, 0.0) {}

    void add(std::span<const double> x) {
        ++count;
        const double n = static_cast<double>(count);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double delta = x[j] - mean[j];
            mean[j] += delta / n;
            m2[j] += delta * (x[j] - mean[j]);
        }
    }

    // Chan et al. pairwise combination.
    void merge(const Accumulator& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(other.count);
        const double n = na + nb;
        for (std::size_t j = 0; j < mean.size(); ++j) {
            const double delta = other.mean[j] - mean[j];
            mean[j] += delta * nb / n;
            m2[j] += other.m2[j] + delta * delta * na * nb / n;
        }
        count += other.count;
    }

    StepMoments moments() const {
        StepMoments m{mean, 0.0, count};
        if (count > 1) {
            double total = 0.0;
            for (double v : m2) total += v;
            m.variance = total / (static_cast<double>(mean.size()) * static_cast<double>(count - 1));
        }
        return m;
    }
};

struct BlockResult {
    std::vector<Accumulator> acc;
};

}  // namespace

std::vector<Vec> EnsembleResult::finite_final_states() const {
    std::vector<Vec> out;
    out.reserve(final_states.size() - std::min(final_states.size(), n_diverged));
    for (std::size_t c = 0; c < final_states.size(); ++c) {
        if (!diverged[c]) out.push_back(final_states[c]);
    }
    return out;
}

EnsembleResult run_ensemble(const ScoreOracle& o, const NoiseSchedule& s, const SamplerConfig& cfg,
                            const EnsembleOptions& opts) {
    if (opts.chains == 0) throw DomainError("at least one chain is required");
    if (opts.dim == 0) throw DomainError("dimension must be at least 1");
    if (opts.dim != o.dim()) throw LengthMismatch("ensemble dimension does not match the oracle");
    if (opts.x0 && opts.x0->size() != opts.dim) throw LengthMismatch("x0 dimension does not match");

    EnsembleResult result;
    result.plan = plan_steps(s, cfg);
    const StepPlan& plan = result.plan;
    const std::size_t n_steps = plan.steps.size();
    const std::size_t dim = opts.dim;

    if (opts.keep_final_states) result.final_states.assign(opts.chains, Vec(dim));
    result.diverged.assign(opts.chains, 0);

    const std::size_t n_blocks = (opts.chains + kBlockSize - 1) / kBlockSize;
    std::vector<BlockResult> blocks(n_blocks);
    std::atomic<std::size_t> next_block{0};

    auto worker = [&] {
        Vec x(dim), next(dim), z(dim);
        for (std::size_t b = next_block++; b < n_blocks; b = next_block++) {
            BlockResult& block = blocks[b];
            if (opts.step_moments) block.acc.assign(n_steps + 1, Accumulator(dim));
            const std::size_t first = b * kBlockSize;
            const std::size_t last = std::min(opts.chains, first + kBlockSize);
            for (std::size_t c = first; c < last; ++c) {
                NormalStream stream(opts.seed, c);
                detail::initialize_state(stream, s.sigma_first(), opts.x0, x);
                if (opts.step_moments) block.acc[0].add(x);
                const bool ok = detail::drive_chain(
                    plan, o, stream, x, next, z,
                    [&](std::size_t k, const StepSpec&, const Vec&, const Vec& after, bool) {
                        if (opts.step_moments && detail::all_finite(after)) block.acc[k + 1].add(after);
                    });
                result.diverged[c] = ok ? 0 : 1;
                if (opts.keep_final_states) result.final_states[c] = x;
            }
        }
    };

    std::size_t threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n_blocks);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    result.n_diverged = static_cast<std::size_t>(std::count(result.diverged.begin(), result.diverged.end(), 1));
    if (opts.step_moments) {
        std::vector<Accumulator> total(n_steps + 1, Accumulator(dim));
        for (const auto& block : blocks) {
            for (std::size_t k = 0; k <= n_steps; ++k) total[k].merge(block.acc[k]);
        }
        result.moments.reserve(n_steps + 1);
        for (const auto& acc : total) result.moments.push_back(acc.moments());
    }
    return result;
}

}  // namespace scorelab
