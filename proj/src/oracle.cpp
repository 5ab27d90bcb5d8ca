// SPDX-License-Identifier: Apache-2.0
#include "scorelab/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "scorelab/errors.hpp"
#include "scorelab/rng.hpp"

namespace scorelab {

namespace {

void check_sigma(double sigma) {
    if (!(sigma > 0.0)) throw DomainError("noise level must be positive");
}

void check_dim(std::size_t expected, std::size_t got) {
    if (expected != got) {
        throw LengthMismatch("state has dimension " + std::to_string(got) + ", oracle expects " +
                             std::to_string(expected));
    }
}

std::string format_number(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace

std::optional<AffineScore> ScoreOracle::affine(double) const { return std::nullopt; }

double ScoreOracle::evaluate_log_density(std::span<const double>, double) const {
    throw UnsupportedOperation("log-density is only defined for exact oracles");
}

Vec ScoreOracle::score(std::span<const double> x, double sigma) const {
    Vec out(x.size());
    score_into(x, sigma, out);
    return out;
}

void ScoreOracle::score_into(std::span<const double> x, double sigma, std::span<double> out) const {
    check_sigma(sigma);
    check_dim(dim(), x.size());
    check_dim(dim(), out.size());
    evaluate(x, sigma, out);
}

Vec ScoreOracle::denoise(std::span<const double> x, double sigma) const {
    Vec out = score(x, sigma);
    const double var = sigma * sigma;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = x[j] + var * out[j];
    return out;
}

double ScoreOracle::log_density(std::span<const double> x, double sigma) const {
    if (!exact()) throw UnsupportedOperation("log-density is only defined for exact oracles");
    check_sigma(sigma);
    check_dim(dim(), x.size());
    return evaluate_log_density(x, sigma);
}

// --- GaussianOracle ---------------------------------------------------------

GaussianOracle::GaussianOracle(Vec mean, double data_std) : mean_(std::move(mean)), data_std_(data_std) {
    if (mean_.empty()) throw LengthMismatch("Gaussian oracle needs a non-empty mean");
    if (!(data_std >= 0.0)) throw DomainError("data_std must be non-negative");
}

std::optional<AffineScore> GaussianOracle::affine(double sigma) const {
    const double inv = 1.0 / (data_std_ * data_std_ + sigma * sigma);
    AffineScore a{-inv, mean_};
    for (double& v : a.offset) v *= inv;
    return a;
}

std::string GaussianOracle::describe() const {
    // Broadcast form when every component agrees.
    const bool uniform = std::all_of(mean_.begin(), mean_.end(), [&](double m) { return m == mean_[0]; });
    std::string m;
    if (uniform) {
        m = format_number(mean_[0]);
    } else {
        for (std::size_t j = 0; j < mean_.size(); ++j) m += (j ? "/" : "") + format_number(mean_[j]);
    }
    return "gauss:" + m + ":" + format_number(data_std_);
}

void GaussianOracle::evaluate(std::span<const double> x, double sigma, std::span<double> out) const {
    const double var = data_std_ * data_std_ + sigma * sigma;
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (mean_[j] - x[j]) / var;
}

double GaussianOracle::evaluate_log_density(std::span<const double> x, double sigma) const {
    const double var = data_std_ * data_std_ + sigma * sigma;
    double sq = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) sq += (x[j] - mean_[j]) * (x[j] - mean_[j]);
    const double d = static_cast<double>(x.size());
    return -0.5 * sq / var - 0.5 * d * std::log(2.0 * std::numbers::pi * var);
}

// --- PointCloudOracle -------------------------------------------------------

PointCloudOracle::PointCloudOracle(std::vector<Vec> points, Vec weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.empty()) throw LengthMismatch("point cloud needs at least one point");
    if (points_.size() != weights_.size()) throw LengthMismatch("one weight per point required");
    const std::size_t d = points_.front().size();
    if (d == 0) throw LengthMismatch("points must have at least one coordinate");
    double total = 0.0;
    for (std::size_t k = 0; k < points_.size(); ++k) {
        check_dim(d, points_[k].size());
        if (!(weights_[k] >= 0.0)) throw DomainError("point weights must be non-negative");
        total += weights_[k];
    }
    if (!(total > 0.0)) throw DomainError("point weights must have a positive sum");
    log_weights_.resize(weights_.size());
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        weights_[k] /= total;
        log_weights_[k] = weights_[k] > 0.0 ? std::log(weights_[k]) : -std::numeric_limits<double>::infinity();
    }
}

std::string PointCloudOracle::describe() const {
    std::string s = "points:";
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (k) s += ";";
        for (std::size_t j = 0; j < points_[k].size(); ++j) s += (j ? "/" : "") + format_number(points_[k][j]);
        s += "," + format_number(weights_[k]);
    }
    return s;
}

double PointCloudOracle::log_terms(std::span<const double> x, double sigma, std::span<double> terms) const {
    const double inv2var = 0.5 / (sigma * sigma);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points_.size(); ++k) {
        double sq = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double diff = x[j] - points_[k][j];
            sq += diff * diff;
        }
        terms[k] = log_weights_[k] - sq * inv2var;
        best = std::max(best, terms[k]);
    }
    return best;
}

Vec PointCloudOracle::responsibilities(std::span<const double> x, double sigma) const {
    check_sigma(sigma);
    check_dim(dim(), x.size());
    Vec r(points_.size());
    const double best = log_terms(x, sigma, r);
    double total = 0.0;
    for (double& v : r) {
        v = std::exp(v - best);
        total += v;
    }
    for (double& v : r) v /= total;
    return r;
}

void PointCloudOracle::evaluate(std::span<const double> x, double sigma, std::span<double> out) const {
    // Reused per thread; this sits in the innermost sampling loop.
    thread_local Vec terms;
    terms.resize(points_.size());
    const double best = log_terms(x, sigma, terms);
    double total = 0.0;
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const double r = std::exp(terms[k] - best);
        if (r == 0.0) continue;
        total += r;
        for (std::size_t j = 0; j < x.size(); ++j) out[j] += r * points_[k][j];
    }
    const double inv_var = 1.0 / (sigma * sigma);
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (out[j] / total - x[j]) * inv_var;
}

double PointCloudOracle::evaluate_log_density(std::span<const double> x, double sigma) const {
    Vec terms(points_.size());
    const double best = log_terms(x, sigma, terms);
    double total = 0.0;
    for (double t : terms) total += std::exp(t - best);
    const double d = static_cast<double>(x.size());
    return best + std::log(total) - 0.5 * d * std::log(2.0 * std::numbers::pi * sigma * sigma);
}

// --- NoisyOracle ------------------------------------------------------------

NoisyOracle::NoisyOracle(OraclePtr inner, double rho, std::uint64_t seed)
    : inner_(std::move(inner)), rho_(rho), seed_(seed) {
    if (!inner_) throw std::invalid_argument("noisy oracle needs an inner oracle");
    if (!(rho >= 0.0)) throw DomainError("error scale rho must be non-negative");
}

std::string NoisyOracle::describe() const {
    return "noisy:" + inner_->describe() + ":" + format_number(rho_) + ":" + std::to_string(seed_);
}

void NoisyOracle::evaluate(std::span<const double> x, double sigma, std::span<double> out) const {
    inner_->score_into(x, sigma, out);
    if (rho_ == 0.0) return;
    thread_local Vec u;
    u.resize(x.size());
    hashed_normals(seed_, x, sigma, u);
    const double scale = rho_ / sigma;
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += scale * u[j];
}

const ScoreOracle& base_oracle(const ScoreOracle& o) {
    if (const auto* noisy = dynamic_cast<const NoisyOracle*>(&o)) return base_oracle(noisy->inner());
    return o;
}

// --- parsing ----------------------------------------------------------------

namespace {

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

Vec parse_coordinates(std::string_view s) {
    Vec v;
    for (auto part : split(s, '/')) v.push_back(parse_double(part));
    return v;
}

OraclePtr parse_oracle_impl(std::string_view text, std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("oracle dimension must be at least 1");
    const auto colon = text.find(':');
    const auto kind = text.substr(0, colon);
    const auto rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

    if (kind == "gauss") {
        const auto parts = split(rest, ':');
        if (parts.size() != 2) throw std::invalid_argument("expected gauss:<mean>:<std>");
        Vec mean = parse_coordinates(parts[0]);
        if (mean.size() == 1) mean.assign(dim, mean[0]);
        if (mean.size() != dim) throw std::invalid_argument("gauss mean does not match dimension");
        return std::make_shared<GaussianOracle>(std::move(mean), parse_double(parts[1]));
    }
    if (kind == "points") {
        std::vector<Vec> points;
        Vec weights;
        for (auto entry : split(rest, ';')) {
            const auto fields = split(entry, ',');
            if (fields.size() != 2) throw std::invalid_argument("expected points:<x>,<w>;...");
            Vec p = parse_coordinates(fields[0]);
            if (p.size() == 1 && dim > 1) p.assign(dim, p[0]);
            if (p.size() != dim) throw std::invalid_argument("point does not match dimension");
            points.push_back(std::move(p));
            weights.push_back(parse_double(fields[1]));
        }
        return std::make_shared<PointCloudOracle>(std::move(points), std::move(weights));
    }
    if (kind == "noisy") {
        // The inner description may itself contain ':'; rho and seed are the
        // last two fields.
        const auto last = rest.rfind(':');
        const auto mid = last == std::string_view::npos ? last : rest.rfind(':', last - 1);
        if (last == std::string_view::npos || mid == std::string_view::npos) {
            throw std::invalid_argument("expected noisy:<inner>:<rho>:<seed>");
        }
        auto inner = parse_oracle_impl(rest.substr(0, mid), dim);
        const double rho = parse_double(rest.substr(mid + 1, last - mid - 1));
        const auto seed_text = rest.substr(last + 1);
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
        if (ec != std::errc{} || ptr != seed_text.data() + seed_text.size() || seed_text.empty()) {
            throw std::invalid_argument("bad noisy oracle seed: '" + std::string(seed_text) + "'");
        }
        return std::make_shared<NoisyOracle>(std::move(inner), rho, seed);
    }
    throw std::invalid_argument("unknown oracle kind '" + std::string(kind) + "'");
}

}  // namespace

OraclePtr parse_oracle(std::string_view text, std::size_t dim) {
    try {
        return parse_oracle_impl(text, dim);
    } catch (const DomainError& e) {
        throw std::invalid_argument(e.what());
    }
}

}  // namespace scorelab
