// SPDX-License-Identifier: Apache-2.0
#include "scorelab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "scorelab/ensemble.hpp"
#include "scorelab/errors.hpp"
#include "scorelab/io.hpp"
#include "scorelab/metrics.hpp"
#include "scorelab/oracle.hpp"
#include "scorelab/rng.hpp"
#include "scorelab/schedule.hpp"

namespace scorelab {

void SweepSpec::validate() const {
    if (n_values.empty()) throw std::invalid_argument("sweep needs at least one N");
    if (epsilons.empty()) throw std::invalid_argument("sweep needs a non-empty epsilon grid");
    if (chains == 0) throw std::invalid_argument("sweep needs chains >= 1");
    for (auto n : n_values) {
        if (n < 2) throw std::invalid_argument("every N must be >= 2");
    }
    if (metric == SweepMetric::W1 && dim != 1) {
        throw std::invalid_argument("w1 metric is 1-D only; use sliced-w2");
    }
    if (projections == 0) throw std::invalid_argument("projections must be >= 1");
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log-spaced grid needs 0 < lo <= hi");
    if (count == 0) throw std::invalid_argument("log-spaced grid needs count >= 1");
    if (count == 1) return {lo};
    std::vector<double> grid(count);
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t k = 0; k < count; ++k) {
        grid[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

namespace {

double distance_to_target(const SweepSpec& spec, const ScoreOracle& o, const std::vector<Vec>& finals,
                          std::uint64_t cell_seed) {
    if (spec.metric == SweepMetric::W1) {
        Vec xs;
        xs.reserve(finals.size());
        for (const auto& v : finals) xs.push_back(v[0]);
        return w1_empirical_1d(xs, target_quantiles_1d(o, xs.size()));
    }
    return sliced_w2(finals, target_samples(o, finals.size(), cell_seed), spec.projections, cell_seed);
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
    spec.validate();
    const OraclePtr oracle = parse_oracle(spec.oracle, spec.dim);

    std::vector<std::size_t> ns = spec.n_values;
    std::vector<double> eps = spec.epsilons;
    std::sort(ns.begin(), ns.end());
    std::sort(eps.begin(), eps.end());

    const std::size_t cells = ns.size() * eps.size();
    const std::size_t budget = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
    const std::size_t cell_workers = std::min(budget, cells);
    const std::size_t chain_threads = std::max<std::size_t>(1, budget / cell_workers);

    std::vector<NoiseSchedule> schedules;
    for (std::size_t n : ns) schedules.push_back(NoiseSchedule::build_geometric(spec.sigma_first, spec.sigma_last, n));

    // Every cell owns its slot, so completion order never shows in the output.
    std::vector<SweepRow> rows(cells);
    auto run_cell = [&](std::size_t index) {
        const std::size_t ni = index / eps.size();
        const std::size_t n = ns[ni];
        const double e = eps[index % eps.size()];
        const NoiseSchedule& sched = schedules[ni];
        const std::uint64_t cell_seed = mix64(spec.seed ^ mix64(n));
        const auto start = std::chrono::steady_clock::now();
        SweepRow row{spec.scheme, n, e, std::nullopt, std::nullopt, spec.chains, 0,
                     std::nullopt, std::nullopt, 0.0, "ok"};
        SamplerConfig cfg{spec.scheme, e, spec.corrector_steps, spec.final_denoise};
        try {
            EnsembleOptions opts;
            opts.chains = spec.chains;
            opts.seed = cell_seed;
            opts.dim = spec.dim;
            opts.threads = chain_threads;
            const auto result = run_ensemble(*oracle, sched, cfg, opts);
            row.eta = result.plan.eta;
            row.beta = result.plan.beta;
            row.diverged = result.n_diverged;
            const auto finals = result.finite_final_states();
            if (!finals.empty()) {
                const double w = distance_to_target(spec, *oracle, finals, cell_seed);
                const QualityScore qs = quality_score(w, finals.size(), result.n_diverged);
                row.w_distance = w;
                row.q = qs.q;
            }
            if (!row.q) row.status = "diverged";
        } catch (const DomainError&) {
            row.status = "domain_error";
            if (spec.scheme == Scheme::CasEpsB && e > 0.0) row.eta = eta_from_eps_b(e, sched.sigma_last());
        }
        row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        rows[index] = std::move(row);
    };

    if (cell_workers <= 1) {
        for (std::size_t k = 0; k < cells; ++k) run_cell(k);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < cell_workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < cells; k = next++) {
                    try {
                        run_cell(k);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows, bool timing) {
    std::string out = "variant,N,epsilon,eta,beta,chains,diverged,w_distance,q,runtime_ms,status\n";
    for (const auto& r : rows) {
        out += std::string(scheme_name(r.scheme)) + "," + std::to_string(r.n) + "," + format_double(r.epsilon) +
               "," + format_optional(r.eta) + "," + format_optional(r.beta) + "," + std::to_string(r.chains) +
               "," + std::to_string(r.diverged) + "," + format_optional(r.w_distance) + "," +
               format_optional(r.q) + "," + (timing ? format_double(r.runtime_ms) : std::string{}) + "," +
               r.status + "\n";
    }
    return out;
}

}  // namespace scorelab
