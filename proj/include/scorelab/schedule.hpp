// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace scorelab {

// Geometric noise levels sigma_1 > ... > sigma_n with constant ratio gamma.
// Immutable once built.
class NoiseSchedule {
public:
    // levels[0] = sigma_first, levels[n-1] = sigma_last. Interior levels are
    // exp of linearly spaced logs. Throws DomainError unless
    // sigma_first > sigma_last > 0 and n >= 2.
    static NoiseSchedule build_geometric(double sigma_first, double sigma_last, std::size_t n);

    std::span<const double> levels() const { return levels_; }
    double gamma() const { return gamma_; }
    std::size_t size() const { return levels_.size(); }
    double sigma_first() const { return levels_.front(); }
    double sigma_last() const { return levels_.back(); }

    // 1-based lookup; i = n + 1 continues the progression (gamma * sigma_n).
    // Throws IndexError outside [1, n + 1].
    double extended_sigma(std::size_t i) const;

    bool operator==(const NoiseSchedule&) const = default;

private:
    NoiseSchedule(std::vector<double> levels, double gamma)
        : levels_(std::move(levels)), gamma_(gamma) {}

    std::vector<double> levels_;
    double gamma_;
};

}  // namespace scorelab
