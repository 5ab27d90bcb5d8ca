// SPDX-License-Identifier: Apache-2.0
#include "scorelab/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace scorelab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    lo = static_cast<std::uint32_t>(p);
    hi = static_cast<std::uint32_t>(p >> 32);
}

PhiloxKey key_from(std::uint64_t k) {
    return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

// Uniform in the open interval (0, 1) with 53 random bits.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

// Box-Muller on one Philox block: 128 bits -> two standard normals.
inline void block_normals(const PhiloxCounter& r, double& z0, double& z1) {
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    z0 = radius * std::cos(angle);
    z1 = radius * std::sin(angle);
}

void fill_normals(PhiloxKey key, std::uint64_t address, std::uint32_t tag, std::span<double> out) {
    const std::size_t n = out.size();
    for (std::size_t b = 0; 2 * b < n; ++b) {
        const PhiloxCounter ctr{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(address),
                                static_cast<std::uint32_t>(address >> 32), tag};
        double z0 = 0.0;
        double z1 = 0.0;
        block_normals(philox4x32(ctr, key), z0, z1);
        out[2 * b] = z0;
        if (2 * b + 1 < n) out[2 * b + 1] = z1;
    }
}

constexpr std::uint32_t kStreamTag = 0x5354524D;  // draws of a NormalStream
constexpr std::uint32_t kHashTag = 0x48415348;    // hashed_normals
constexpr std::uint32_t kDirTag = 0x44495253;     // random_directions

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t lo0, hi0, lo1, hi1;
        mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
        mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(key_from(mix64(seed) ^ mix64(~stream))) {}

void NormalStream::at(std::uint64_t index, std::span<double> out) const {
    fill_normals(key_, index, kStreamTag, out);
}

void NormalStream::next(std::span<double> out) {
    at(draw_, out);
    ++draw_;
}

std::vector<double> NormalStream::next(std::size_t dim) {
    std::vector<double> z(dim);
    next(std::span<double>(z));
    return z;
}

void hashed_normals(std::uint64_t seed, std::span<const double> x, double sigma,
                    std::span<double> out) {
    std::uint64_t h = mix64(std::bit_cast<std::uint64_t>(sigma) ^ 0x736967ULL);
    for (double v : x) {
        // +0.0 and -0.0 are the same point.
        const double canonical = v == 0.0 ? 0.0 : v;
        h = mix64(h ^ std::bit_cast<std::uint64_t>(canonical));
    }
    fill_normals(key_from(mix64(seed)), h, kHashTag, out);
}

std::vector<std::vector<double>> random_directions(std::size_t count, std::size_t dim,
                                                   std::uint64_t seed) {
    const PhiloxKey key = key_from(mix64(seed));
    std::vector<std::vector<double>> dirs(count, std::vector<double>(dim));
    for (std::size_t k = 0; k < count; ++k) {
        auto& d = dirs[k];
        for (std::uint64_t attempt = 0;; ++attempt) {
            fill_normals(key, (static_cast<std::uint64_t>(k) << 16) | attempt, kDirTag, d);
            double norm2 = 0.0;
            for (double v : d) norm2 += v * v;
            if (norm2 > 1e-300) {
                const double inv = 1.0 / std::sqrt(norm2);
                for (double& v : d) v *= inv;
                break;
            }
        }
    }
    return dirs;
}

}  // namespace scorelab
