#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lab/rng.hpp"

using namespace lab;

TEST_CASE("philox4x32-10 known-answer vectors") {
    auto r0 = Rng::philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(r0[0] == 0x6627e8d5u);
    CHECK(r0[1] == 0xe169c58du);
    CHECK(r0[2] == 0xbc57ac4cu);
    CHECK(r0[3] == 0x9b00dbd8u);
    auto r1 = Rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu});
    CHECK(r1[0] == 0x408f276du);
    CHECK(r1[1] == 0x41c83b0eu);
    CHECK(r1[2] == 0xa20bc7c6u);
    CHECK(r1[3] == 0x6d5451fdu);
    auto r2 = Rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                              {0xa4093822u, 0x299f31d0u});
    CHECK(r2[0] == 0xd16cfe09u);
    CHECK(r2[1] == 0x94fdccebu);
    CHECK(r2[2] == 0x5001e420u);
    CHECK(r2[3] == 0x24126ea1u);
}

TEST_CASE("determinism and stream independence") {
    Rng a(42, 7), b(42, 7), c(42, 8);
    bool same = true, differ = false;
    for (int i = 0; i < 100; ++i) {
        uint64_t va = a.next_u64();
        same = same && (va == b.next_u64());
        differ = differ || (va != c.next_u64());
    }
    CHECK(same);
    CHECK(differ);

    Rng m(5);
    Rng s1 = m.split(3), s2 = m.split(3);
    CHECK(s1.next_u64() == s2.next_u64());
    CHECK(m.split(1).next_u64() != m.split(2).next_u64());
}

TEST_CASE("uniforms live in (0,1) and average to 1/2") {
    Rng r(1);
    double s = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
    }
    CHECK(std::fabs(s / N - 0.5) < 0.005);
}

TEST_CASE("inverse normal round trip and moments") {
    CHECK(inverse_normal_cdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    for (double x : {-3.0, -0.7, 0.0, 1.3, 4.2})
        CHECK(inverse_normal_cdf(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
    Rng r(2);
    double m1 = 0.0, m2 = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        double z = r.normal();
        m1 += z;
        m2 += z * z;
    }
    CHECK(std::fabs(m1 / N) < 0.01);
    CHECK(std::fabs(m2 / N - 1.0) < 0.02);
}
