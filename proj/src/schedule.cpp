// SPDX-License-Identifier: Apache-2.0
#include "scorelab/schedule.hpp"

#include <cmath>
#include <string>

#include "scorelab/errors.hpp"

namespace scorelab {

NoiseSchedule NoiseSchedule::build_geometric(double sigma_first, double sigma_last, std::size_t n) {
    if (!(sigma_last > 0.0) || !(sigma_first > sigma_last) || !std::isfinite(sigma_first)) {
        throw DomainError("geometric schedule needs sigma_first > sigma_last > 0, got " +
                          std::to_string(sigma_first) + " and " + std::to_string(sigma_last));
    }
    if (n < 2) throw DomainError("geometric schedule needs at least 2 levels");

    const double log_first = std::log(sigma_first);
    const double log_last = std::log(sigma_last);
    const double steps = static_cast<double>(n - 1);
    std::vector<double> levels(n);
    levels.front() = sigma_first;
    levels.back() = sigma_last;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double t = static_cast<double>(i) / steps;
        levels[i] = std::exp(log_first + t * (log_last - log_first));
    }
    const double gamma = std::exp((log_last - log_first) / steps);
    return NoiseSchedule(std::move(levels), gamma);
}

double NoiseSchedule::extended_sigma(std::size_t i) const {
    const std::size_t n = levels_.size();
    if (i < 1 || i > n + 1) {
        throw IndexError("noise level index " + std::to_string(i) + " outside [1, " +
                         std::to_string(n + 1) + "]");
    }
    return i <= n ? levels_[i - 1] : gamma_ * levels_[n - 1];
}

}  // namespace scorelab
