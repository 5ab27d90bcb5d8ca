#include <doctest.h>

#include <cmath>
#include <numeric>

#include "scorelab/rng.hpp"

using namespace scorelab;
using Vec = std::vector<double>;

TEST_CASE("philox4x32-10 known answers") {
    // Reference vectors distributed with Random123.
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream is addressable and deterministic") {
    NormalStream a(42, 3), b(42, 3);
    std::vector<Vec> seq;
    for (int k = 0; k < 5; ++k) seq.push_back(a.next(7));
    CHECK(a.draws() == 5);
    for (int k = 0; k < 5; ++k) CHECK(b.next(7) == seq[k]);

    Vec out(7);
    a.at(2, out);
    CHECK(out == seq[2]);
    CHECK(a.draws() == 5);

    NormalStream c(42, 3);
    c.skip(3);
    CHECK(c.next(7) == seq[3]);

    // Streams and seeds are separated.
    CHECK(NormalStream(42, 4).next(7) != seq[0]);
    CHECK(NormalStream(43, 3).next(7) != seq[0]);
}

TEST_CASE("a draw's leading components do not depend on its length") {
    NormalStream a(5, 0), b(5, 0);
    const Vec short_draw = a.next(3);
    const Vec long_draw = b.next(9);
    for (int j = 0; j < 3; ++j) CHECK(short_draw[j] == long_draw[j]);
}

TEST_CASE("normal draws have unit moments") {
    NormalStream s(2021, 0);
    const std::size_t n = 200000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (std::size_t k = 0; k < n / 4; ++k) {
        for (double z : s.next(4)) {
            m1 += z;
            m2 += z * z;
            m4 += z * z * z * z;
        }
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    // Four standard errors.
    CHECK(std::abs(m1) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("hashed normals are a function of (seed, x, sigma)") {
    Vec u(3), v(3), w(3);
    const Vec x{0.25, -1.0, 3.0};
    hashed_normals(9, x, 0.5, u);
    hashed_normals(9, x, 0.5, v);
    CHECK(u == v);
    hashed_normals(9, x, 0.51, w);
    CHECK(u != w);
    hashed_normals(10, x, 0.5, w);
    CHECK(u != w);

    const Vec neg_zero{-0.0}, pos_zero{0.0};
    Vec a(1), b(1);
    hashed_normals(1, neg_zero, 1.0, a);
    hashed_normals(1, pos_zero, 1.0, b);
    CHECK(a == b);
}

TEST_CASE("random directions are unit vectors") {
    const auto dirs = random_directions(64, 5, 3);
    REQUIRE(dirs.size() == 64);
    for (const auto& d : dirs) {
        REQUIRE(d.size() == 5);
        CHECK(std::sqrt(std::inner_product(d.begin(), d.end(), d.begin(), 0.0)) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(random_directions(64, 5, 3) == dirs);
    CHECK(random_directions(64, 5, 4) != dirs);
}
