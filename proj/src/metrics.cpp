// SPDX-License-Identifier: Apache-2.0
#include "scorelab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "scorelab/errors.hpp"
#include "scorelab/rng.hpp"

namespace scorelab {

namespace {

void check_pair(std::size_t na, std::size_t nb) {
    if (na != nb) throw LengthMismatch("sample sets must have equal size");
    if (na == 0) throw LengthMismatch("sample sets must be non-empty");
}

Vec sorted(std::span<const double> v) {
    Vec s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return s;
}

double mean_sq_sorted_diff(Vec a, Vec b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) total += (a[k] - b[k]) * (a[k] - b[k]);
    return total / static_cast<double>(a.size());
}

}  // namespace

double w1_empirical_1d(std::span<const double> a, std::span<const double> b) {
    check_pair(a.size(), b.size());
    const Vec sa = sorted(a);
    const Vec sb = sorted(b);
    double total = 0.0;
    for (std::size_t k = 0; k < sa.size(); ++k) total += std::abs(sa[k] - sb[k]);
    return total / static_cast<double>(sa.size());
}

double w2_empirical_1d(std::span<const double> a, std::span<const double> b) {
    check_pair(a.size(), b.size());
    return std::sqrt(mean_sq_sorted_diff(Vec(a.begin(), a.end()), Vec(b.begin(), b.end())));
}

double w2_gaussian_closed(double m1, double s1, double m2, double s2) {
    if (!(s1 >= 0.0) || !(s2 >= 0.0)) throw DomainError("standard deviations must be non-negative");
    return std::hypot(m1 - m2, s1 - s2);
}

double sliced_w2(const std::vector<Vec>& a, const std::vector<Vec>& b, std::size_t projections,
                 std::uint64_t seed) {
    check_pair(a.size(), b.size());
    if (projections == 0) throw DomainError("at least one projection is required");
    const std::size_t dim = a.front().size();
    if (dim == 0) throw LengthMismatch("samples must have at least one coordinate");
    for (const auto& v : a) if (v.size() != dim) throw LengthMismatch("inconsistent sample dimension");
    for (const auto& v : b) if (v.size() != dim) throw LengthMismatch("inconsistent sample dimension");

    const auto dirs = random_directions(projections, dim, seed);
    Vec pa(a.size()), pb(b.size());
    double total = 0.0;
    for (const auto& dir : dirs) {
        for (std::size_t k = 0; k < a.size(); ++k) {
            pa[k] = std::inner_product(dir.begin(), dir.end(), a[k].begin(), 0.0);
            pb[k] = std::inner_product(dir.begin(), dir.end(), b[k].begin(), 0.0);
        }
        total += mean_sq_sorted_diff(pa, pb);
    }
    return std::sqrt(total / static_cast<double>(projections));
}

SigmaEstimate effective_sigma_estimate(const std::vector<Vec>& residuals) {
    if (residuals.size() < 2) throw InsufficientSamples("need at least two residuals");
    const std::size_t dim = residuals.front().size();
    if (dim == 0) throw LengthMismatch("residuals must have at least one coordinate");
    const double n = static_cast<double>(residuals.size());

    double mean_var = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (const auto& r : residuals) {
            if (r.size() != dim) throw LengthMismatch("inconsistent residual dimension");
            mean += r[j];
        }
        mean /= n;
        double ss = 0.0;
        for (const auto& r : residuals) ss += (r[j] - mean) * (r[j] - mean);
        mean_var += ss / (n - 1.0);
    }
    mean_var /= static_cast<double>(dim);
    const double sigma = std::sqrt(mean_var);
    return {sigma, sigma / std::sqrt(2.0 * static_cast<double>(dim) * (n - 1.0)), residuals.size()};
}

double quality_q(double w_distance) { return -std::log10(w_distance + 1e-12); }

QualityScore quality_score(double w_distance, std::size_t n_samples, std::size_t n_diverged) {
    QualityScore q{w_distance, std::nullopt, n_samples, n_diverged};
    const std::size_t total = n_samples + n_diverged;
    if (n_samples > 0 && 2 * n_diverged <= total && std::isfinite(w_distance)) q.q = quality_q(w_distance);
    return q;
}

Vec gaussian_quantiles(double mean, double std, std::size_t n) {
    if (!(std >= 0.0)) throw DomainError("standard deviation must be non-negative");
    Vec q(n, mean);
    if (std == 0.0) return q;
    const boost::math::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double p = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        q[k] = mean + std * boost::math::quantile(unit, p);
    }
    return q;
}

Vec discrete_quantiles(std::span<const double> points, std::span<const double> weights, std::size_t n) {
    if (points.size() != weights.size() || points.empty()) {
        throw LengthMismatch("one weight per point required");
    }
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return points[i] < points[j]; });
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);

    Vec q(n);
    std::size_t pos = 0;
    double cumulative = weights[order[0]] / total;
    for (std::size_t k = 0; k < n; ++k) {
        const double p = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        while (p > cumulative && pos + 1 < order.size()) cumulative += weights[order[++pos]] / total;
        q[k] = points[order[pos]];
    }
    return q;
}

Vec target_quantiles_1d(const ScoreOracle& o, std::size_t n) {
    const ScoreOracle& base = base_oracle(o);
    if (base.dim() != 1) throw UnsupportedOperation("target quantiles need a 1-D oracle");
    if (const auto* g = dynamic_cast<const GaussianOracle*>(&base)) {
        return gaussian_quantiles(g->mean()[0], g->data_std(), n);
    }
    if (const auto* pc = dynamic_cast<const PointCloudOracle*>(&base)) {
        Vec xs;
        for (const auto& p : pc->points()) xs.push_back(p[0]);
        return discrete_quantiles(xs, pc->weights(), n);
    }
    throw UnsupportedOperation("no target distribution known for " + o.describe());
}

std::vector<Vec> target_samples(const ScoreOracle& o, std::size_t n, std::uint64_t seed) {
    const ScoreOracle& base = base_oracle(o);
    const std::size_t dim = base.dim();
    std::vector<Vec> out(n, Vec(dim));
    NormalStream stream(seed, 0x7A7A7A7AULL);
    if (const auto* g = dynamic_cast<const GaussianOracle*>(&base)) {
        for (auto& v : out) {
            stream.next(std::span<double>(v));
            for (std::size_t j = 0; j < dim; ++j) v[j] = g->mean()[j] + g->data_std() * v[j];
        }
        return out;
    }
    if (const auto* pc = dynamic_cast<const PointCloudOracle*>(&base)) {
        // Deterministic stratified allocation: the k-th sample takes the point
        // whose cumulative weight covers (k + 1/2) / n.
        std::vector<double> idx(pc->points().size());
        std::iota(idx.begin(), idx.end(), 0.0);
        const Vec which = discrete_quantiles(idx, pc->weights(), n);
        for (std::size_t k = 0; k < n; ++k) out[k] = pc->points()[static_cast<std::size_t>(which[k])];
        return out;
    }
    throw UnsupportedOperation("no target distribution known for " + o.describe());
}

}  // namespace scorelab
