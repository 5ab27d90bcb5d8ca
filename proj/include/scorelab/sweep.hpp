// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scorelab/sampler.hpp"

namespace scorelab {

enum class SweepMetric { W1, SlicedW2 };

struct SweepSpec {
    std::string oracle;  // mini-language, see parse_oracle
    std::size_t dim = 1;
    double sigma_first = 1.0;
    double sigma_last = 0.01;
    std::vector<std::size_t> n_values;
    Scheme scheme = Scheme::CasEpsC;
    std::vector<double> epsilons;
    std::size_t chains = 1000;
    std::uint64_t seed = 0;
    SweepMetric metric = SweepMetric::W1;
    std::size_t projections = 64;  // sliced-w2 only
    bool final_denoise = false;
    std::size_t corrector_steps = 0;
    std::size_t threads = 0;

    // Throws std::invalid_argument on an empty grid, chains == 0, N < 2, or a
    // W1 metric on a multi-dimensional oracle.
    void validate() const;
};

struct SweepRow {
    Scheme scheme;
    std::size_t n;
    double epsilon;
    std::optional<double> eta;
    std::optional<double> beta;
    std::size_t chains;
    std::size_t diverged;
    std::optional<double> w_distance;
    std::optional<double> q;
    double runtime_ms;
    std::string status;  // ok | domain_error | diverged
};

// log-spaced grid with both endpoints included.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

// Rows ordered by N, then epsilon, one per grid cell. Cell failures become
// status values; only an invalid spec throws. All cells of one N share the
// seed derived from (seed, N), so epsilon columns are compared on common
// random numbers.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

// Columns: variant,N,epsilon,eta,beta,chains,diverged,w_distance,q,runtime_ms,status.
// runtime_ms is left empty unless `timing`, keeping output reproducible.
std::string sweep_to_csv(const std::vector<SweepRow>& rows, bool timing);

}  // namespace scorelab
