// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scorelab {

using Vec = std::vector<double>;

// score(x, sigma) = slope * x + offset, isotropic.
struct AffineScore {
    double slope;
    Vec offset;
};

// Evaluator of s(x, sigma) ~ grad_x log p_sigma(x), where p_sigma is the data
// distribution convolved with N(0, sigma^2 I).
//
// Implementations are immutable and safe to evaluate from several threads.
class ScoreOracle {
public:
    virtual ~ScoreOracle() = default;

    virtual std::size_t dim() const = 0;
    // True when score() is the exact gradient of log_density().
    virtual bool exact() const = 0;
    // Coefficients when the score is affine in x at this sigma.
    virtual std::optional<AffineScore> affine(double sigma) const;
    bool is_affine() const { return affine(1.0).has_value(); }

    // Mini-language description, e.g. "gauss:0:1" (see parse_oracle).
    virtual std::string describe() const = 0;

    // Throws DomainError for sigma <= 0 and LengthMismatch for wrong dimension.
    Vec score(std::span<const double> x, double sigma) const;
    void score_into(std::span<const double> x, double sigma, std::span<double> out) const;

    // Expected denoised sample H(x, sigma) = x + sigma^2 score(x, sigma).
    Vec denoise(std::span<const double> x, double sigma) const;

    // Fully normalized log p_sigma(x). Throws UnsupportedOperation for
    // approximate oracles.
    double log_density(std::span<const double> x, double sigma) const;

protected:
    // Arguments are already validated.
    virtual void evaluate(std::span<const double> x, double sigma, std::span<double> out) const = 0;
    virtual double evaluate_log_density(std::span<const double> x, double sigma) const;
};

using OraclePtr = std::shared_ptr<const ScoreOracle>;

// Isotropic Gaussian data N(mean, data_std^2 I); data_std = 0 is a point mass.
class GaussianOracle final : public ScoreOracle {
public:
    GaussianOracle(Vec mean, double data_std);

    std::size_t dim() const override { return mean_.size(); }
    bool exact() const override { return true; }
    std::optional<AffineScore> affine(double sigma) const override;
    std::string describe() const override;

    const Vec& mean() const { return mean_; }
    double data_std() const { return data_std_; }

protected:
    void evaluate(std::span<const double> x, double sigma, std::span<double> out) const override;
    double evaluate_log_density(std::span<const double> x, double sigma) const override;

private:
    Vec mean_;
    double data_std_;
};

// Weighted empirical distribution sum_k w_k delta(x - x_k).
class PointCloudOracle final : public ScoreOracle {
public:
    // Weights must be non-negative with a positive sum; they are normalized.
    PointCloudOracle(std::vector<Vec> points, Vec weights);

    std::size_t dim() const override { return points_.front().size(); }
    bool exact() const override { return true; }
    std::string describe() const override;

    const std::vector<Vec>& points() const { return points_; }
    const Vec& weights() const { return weights_; }

    // Posterior responsibilities r_k(x, sigma), computed with log-sum-exp.
    Vec responsibilities(std::span<const double> x, double sigma) const;

protected:
    void evaluate(std::span<const double> x, double sigma, std::span<double> out) const override;
    double evaluate_log_density(std::span<const double> x, double sigma) const override;

private:
    // log w_k - |x - x_k|^2 / (2 sigma^2) into `terms`; returns their max.
    double log_terms(std::span<const double> x, double sigma, std::span<double> terms) const;

    std::vector<Vec> points_;
    Vec weights_;
    Vec log_weights_;
};

// inner.score + (rho / sigma) u, with u a standard normal vector hashed from
// (seed, x, sigma). Stands in for a trained model with bounded relative error.
class NoisyOracle final : public ScoreOracle {
public:
    NoisyOracle(OraclePtr inner, double rho, std::uint64_t seed);

    std::size_t dim() const override { return inner_->dim(); }
    bool exact() const override { return false; }
    std::string describe() const override;

    const ScoreOracle& inner() const { return *inner_; }
    double rho() const { return rho_; }
    std::uint64_t seed() const { return seed_; }

protected:
    void evaluate(std::span<const double> x, double sigma, std::span<double> out) const override;

private:
    OraclePtr inner_;
    double rho_;
    std::uint64_t seed_;
};

// Parses the oracle mini-language:
//   gauss:<mean>:<std>                 mean broadcast to `dim` components
//   points:<x1>,<w1>;<x2>,<w2>;...     coordinates of a point separated by '/'
//   noisy:<inner>:<rho>:<seed>
// Throws std::invalid_argument on malformed input.
OraclePtr parse_oracle(std::string_view text, std::size_t dim);

// The noise-free oracle underneath any NoisyOracle wrappers.
const ScoreOracle& base_oracle(const ScoreOracle& o);

}  // namespace scorelab
