#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "srp/rng.hpp"

using namespace srp;

TEST_CASE("philox reference vector") {
    // Philox4x32-10 with zero counter and zero key (Random123 known answer).
    auto out = rng::philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("streams are reproducible and key-sensitive") {
    rng::Stream a(rng::stream_key(42, 1, 2, 3));
    rng::Stream b(rng::stream_key(42, 1, 2, 3));
    rng::Stream c(rng::stream_key(42, 1, 2, 4));
    bool diverged = false;
    for (int i = 0; i < 100; ++i) {
        uint64_t va = a.next_u64();
        CHECK(va == b.next_u64());
        if (va != c.next_u64()) diverged = true;
    }
    CHECK(diverged);
}

TEST_CASE("uniform stays in range and fills it") {
    rng::Stream st(rng::stream_key(7));
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 10000; ++i) {
        double u = st.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
}

TEST_CASE("normal moments") {
    rng::Stream st(rng::stream_key(11));
    double sum = 0, sumsq = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        double x = st.normal();
        sum += x;
        sumsq += x * x;
    }
    double mean = sum / n;
    double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("unit vectors are unit and cover both hemispheres") {
    rng::Stream st(rng::stream_key(13));
    int up = 0;
    for (int i = 0; i < 2000; ++i) {
        auto v = st.unit_vector();
        CHECK(std::abs(v.norm() - 1.0) < 1e-12);
        if (v.z() > 0) ++up;
    }
    CHECK(up > 800);
    CHECK(up < 1200);
}

TEST_CASE("uniform quaternions are normalized and spread") {
    rng::Stream st(rng::stream_key(17));
    double wsum = 0;
    for (int i = 0; i < 2000; ++i) {
        auto q = st.uniform_quaternion();
        CHECK(std::abs(q.norm() - 1.0) < 1e-12);
        wsum += q.w();
    }
    CHECK(std::abs(wsum / 2000) < 0.05);  // symmetric about zero
}

TEST_CASE("poisson mean") {
    rng::Stream st(rng::stream_key(19));
    double sum = 0;
    for (int i = 0; i < 20000; ++i) sum += st.poisson(1.5);
    CHECK(sum / 20000 == doctest::Approx(1.5).epsilon(0.05));
    CHECK(rng::Stream(rng::stream_key(1)).poisson(0.0) == 0);
}
