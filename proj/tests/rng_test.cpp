#include "caresim/rng.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

using caresim::RngSet;
using caresim::RngStream;

TEST(RngStream, SameSeedSameStreamRepeats) {
    RngStream a(12345, "mortality");
    RngStream b(12345, "mortality");
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, DifferentStreamsDiverge) {
    RngStream a(12345, "mortality");
    RngStream b(12345, "fertility");
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    EXPECT_EQ(same, 0);
}

TEST(RngStream, DifferentSeedsDiverge) {
    RngStream a(1, "allocation");
    RngStream b(2, "allocation");
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next_u64() == b.next_u64()) ++same;
    EXPECT_EQ(same, 0);
}

TEST(RngStream, DrawsTakenCounts) {
    RngStream r(7, "x");
    EXPECT_EQ(r.draws_taken(), 0u);
    r.next_u64();
    r.uniform01();
    EXPECT_EQ(r.draws_taken(), 2u);
}

TEST(RngStream, Uniform01HalfOpenRange) {
    RngStream r(99, "u");
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform01();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    // with 1e5 draws the extremes should come close to the interval ends
    EXPECT_LT(lo, 0.001);
    EXPECT_GT(hi, 0.999);
}

TEST(RngStream, BernoulliDegenerateCases) {
    RngStream r(3, "b");
    for (int i = 0; i < 200; ++i) {
        EXPECT_FALSE(r.bernoulli(0.0));
        EXPECT_TRUE(r.bernoulli(1.0));
    }
}

TEST(RngStream, BernoulliFrequency) {
    RngStream r(3, "b2");
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (r.bernoulli(0.3)) ++hits;
    // binomial sd ~ sqrt(n*0.3*0.7) ~ 145; allow 5 sd
    EXPECT_NEAR(hits, 0.3 * n, 5 * std::sqrt(n * 0.3 * 0.7));
}

TEST(RngStream, UniformIndexBoundsAndErrors) {
    RngStream r(11, "idx");
    std::array<int, 7> counts{};
    for (int i = 0; i < 70000; ++i) {
        auto k = r.uniform_index(7);
        ASSERT_LT(k, 7u);
        ++counts[k];
    }
    // each bucket expects 10000, sd ~ 95; allow 6 sd
    for (int c : counts) EXPECT_NEAR(c, 10000, 600);
    EXPECT_THROW(r.uniform_index(0), std::invalid_argument);
}

TEST(RngStream, NormalMoments) {
    RngStream r(2024, "n");
    double sum = 0.0, sumSq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double x = r.normal();
        sum += x;
        sumSq += x * x;
    }
    double mean = sum / n;
    double var = sumSq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(RngStream, GeometricWeeksAtLeastOneAndMeanMatches) {
    RngStream r(5, "g");
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        int w = r.geometric_weeks(2.0);
        ASSERT_GE(w, 1);
        sum += w;
    }
    // geometric on {1,2,...} with p = 1/mean has the requested mean
    EXPECT_NEAR(sum / n, 2.0, 0.05);
}

TEST(RngStream, CategoricalProportionsAndZeroWeight) {
    RngStream r(17, "cat");
    std::vector<double> w{2.0, 0.0, 6.0};
    std::array<int, 3> counts{};
    for (int i = 0; i < 40000; ++i) ++counts[r.categorical(w)];
    EXPECT_EQ(counts[1], 0);
    EXPECT_NEAR(counts[0], 10000, 600);
    EXPECT_NEAR(counts[2], 30000, 600);
}

TEST(RngStream, CategoricalRejectsNonPositiveTotal) {
    RngStream r(17, "cat2");
    std::vector<double> zero{0.0, 0.0};
    EXPECT_THROW(r.categorical(zero), std::invalid_argument);
    std::vector<double> empty;
    EXPECT_THROW(r.categorical(empty), std::invalid_argument);
}

TEST(RngSet, StreamsAreIndependentPerPurpose) {
    RngSet set(42);
    // same master seed, but each named stream starts somewhere else
    EXPECT_NE(set.mortality.next_u64(), set.fertility.next_u64());
    EXPECT_NE(set.allocation.next_u64(), set.health.next_u64());

    // consuming one stream must not shift another
    RngSet fresh(42);
    for (int i = 0; i < 100; ++i) fresh.mortality.next_u64();
    RngSet control(42);
    EXPECT_EQ(fresh.fertility.next_u64(), control.fertility.next_u64());
}
