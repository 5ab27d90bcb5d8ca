// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace scorelab {

// Philox4x32-10 block function (Salmon et al., SC 2011).
// Maps a 128-bit counter and a 64-bit key to 128 pseudo-random bits.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// SplitMix64 finalizer; used to turn seeds and bit patterns into keys.
std::uint64_t mix64(std::uint64_t x);

// Stream of standard normal vectors addressed by (seed, stream, draw).
//
// Every draw is a pure function of its address, so a chain's k-th noise
// vector does not depend on how many draws other chains have taken. Two
// samplers that consume the same number of draws per step therefore see the
// same noise, draw for draw.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream);

    // Fills `out` with the next draw and advances the draw counter by one.
    void next(std::span<double> out);
    std::vector<double> next(std::size_t dim);
    void skip(std::uint64_t count = 1) { draw_ += count; }

    std::uint64_t draws() const { return draw_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    // Draw `index` without touching the counter.
    void at(std::uint64_t index, std::span<double> out) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    PhiloxKey key_;
    std::uint64_t draw_ = 0;
};

// Standard normal vector determined by (seed, x, sigma) alone. Used for
// reproducible perturbations that behave like a fixed random field.
void hashed_normals(std::uint64_t seed, std::span<const double> x, double sigma,
                    std::span<double> out);

// Unit directions on the sphere in `dim` dimensions, deterministic in seed.
std::vector<std::vector<double>> random_directions(std::size_t count, std::size_t dim,
                                                   std::uint64_t seed);

}  // namespace scorelab
