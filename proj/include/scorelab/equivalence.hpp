// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace scorelab {

struct EquivalenceOptions {
    std::vector<double> gammas{0.5, 0.9, 0.99};
    std::vector<std::size_t> dims{1, 8};
    std::uint64_t seed = 2021;
    double tolerance = 1e-12;
    std::size_t levels = 6;
    std::size_t samples_per_level = 16;
    // Added to every beta handed to the consistent step. Test hook; 0 in real runs.
    double beta_fault = 0.0;
};

struct IdentityCheck {
    std::string name;
    double gamma;
    std::size_t dim;
    double max_error;  // relative
    bool passed;
};

// Checks, per (gamma, dim):
//   eq8-form          CAS(eps_c = 2) == x + eta sigma_i^2 s + gamma sqrt(eta sigma_i^2) z
//   als-noise-ratio   CAS(eps_c = 2) noise / ALS(alpha' = eta sigma_i^2) noise == gamma / sqrt(2)
//   pc-deterministic  CAS(eta = 1 - gamma^2, z = 0) == PC predictor (z = 0)
//   pc-noise-ratio    CAS(eta = 1 - gamma^2) noise / PC predictor noise == gamma
//   denoise-interp    CAS(eta = 1 - gamma) == gamma x + (1 - gamma) H(x, sigma_i)
//   noise-denoise     CAS(eta = 1) == H(x, sigma_i) + sigma_{i+1} z
//   stream-alignment  chain traces of cas-c(1) vs denoise-interp and
//                     cas-b(eta = 1) vs noise-denoise agree step for step
std::vector<IdentityCheck> verify_equivalences(const EquivalenceOptions& opts);

}  // namespace scorelab
