// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "scorelab/oracle.hpp"

namespace scorelab {

// Exact 1-D Wasserstein-1 between equal-size empirical measures: mean absolute
// difference of the sorted samples. Throws LengthMismatch on unequal or empty
// inputs.
double w1_empirical_1d(std::span<const double> a, std::span<const double> b);

// Exact 1-D Wasserstein-2 between equal-size empirical measures.
double w2_empirical_1d(std::span<const double> a, std::span<const double> b);

// W2 between N(m1, s1^2) and N(m2, s2^2).
double w2_gaussian_closed(double m1, double s1, double m2, double s2);

// sqrt of the mean over `projections` random unit directions of the squared
// 1-D W2 between the projected samples. Deterministic in seed.
double sliced_w2(const std::vector<Vec>& a, const std::vector<Vec>& b, std::size_t projections,
                 std::uint64_t seed);

struct SigmaEstimate {
    double sigma = 0.0;           // root mean square of per-component stds
    double standard_error = 0.0;  // Gaussian approximation sigma / sqrt(2 d (n - 1))
    std::size_t n = 0;
};

// Throws InsufficientSamples for fewer than two residuals.
SigmaEstimate effective_sigma_estimate(const std::vector<Vec>& residuals);

// Higher is better; Q = -log10(W + 1e-12).
struct QualityScore {
    double w_distance = 0.0;
    std::optional<double> q;  // undefined when more than half the chains diverged
    std::size_t n_samples = 0;
    std::size_t n_diverged = 0;
};

double quality_q(double w_distance);
QualityScore quality_score(double w_distance, std::size_t n_samples, std::size_t n_diverged);

// n equally spaced quantiles (k + 1/2) / n of the data distribution behind a
// 1-D oracle (Gaussian or point cloud; noisy wrappers are looked through).
Vec gaussian_quantiles(double mean, double std, std::size_t n);
Vec discrete_quantiles(std::span<const double> points, std::span<const double> weights, std::size_t n);
Vec target_quantiles_1d(const ScoreOracle& o, std::size_t n);

// n samples from the data distribution behind an oracle of any dimension.
std::vector<Vec> target_samples(const ScoreOracle& o, std::size_t n, std::uint64_t seed);

}  // namespace scorelab
