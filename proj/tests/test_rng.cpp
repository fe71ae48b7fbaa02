#include "mpsens/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace mpsens;

TEST(Rng, FirstOutputMatchesSplitMix64Reference) {
    // Published first output of SplitMix64 seeded with 0.
    CounterRng rng(0);
    EXPECT_EQ(rng(), 0xe220a8397b1dcdafULL);
}

TEST(Rng, CounterSeekReproducesStream) {
    CounterRng a(1234);
    for(int i = 0; i < 5; ++i) (void)a();
    CounterRng b(1234, 5);
    for(int i = 0; i < 10; ++i) EXPECT_EQ(a(), b());
}

TEST(Rng, StreamKeysAreDistinct) {
    std::set<std::uint64_t> keys;
    for(std::uint64_t r = 0; r < 50; ++r)
        for(auto role : {StreamRole::gates, StreamRole::measurement_coins, StreamRole::measurement_outcomes, StreamRole::tensors})
            keys.insert(derive_stream_key(7, r, role));
    EXPECT_EQ(keys.size(), 200U);
    EXPECT_NE(derive_stream_key(7, 0, StreamRole::gates), derive_stream_key(8, 0, StreamRole::gates));
}

TEST(Rng, RealizationStreamsAreDeterministic) {
    auto a = RealizationStreams::make(3, 4), b = RealizationStreams::make(3, 4);
    EXPECT_EQ(a.gates(), b.gates());
    EXPECT_EQ(a.coins(), b.coins());
    EXPECT_EQ(a.outcomes(), b.outcomes());
}

TEST(Rng, UniformAndGaussianMoments) {
    CounterRng   rng(99);
    const int    n = 200000;
    double       su = 0, sn = 0, sn2 = 0, sc2 = 0;
    for(int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        su += u;
        const double g = rng.normal();
        sn += g;
        sn2 += g * g;
        sc2 += std::norm(rng.complex_normal());
    }
    EXPECT_NEAR(su / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
    EXPECT_NEAR(sn / n, 0.0, 5 / std::sqrt(n));
    EXPECT_NEAR(sn2 / n, 1.0, 5 * std::sqrt(2.0 / n));
    EXPECT_NEAR(sc2 / n, 1.0, 5 * std::sqrt(1.0 / n));
}
