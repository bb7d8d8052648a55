#include <cmath>

#include <gtest/gtest.h>

#include "orbitstream/qoe.hpp"

using namespace orbitstream;

TEST(Qoe, AllTermsZero) {
    const std::vector<int> top(9, 5);
    const auto q = qoe_chunk(1.2, 1.2, 0.0, top, 5, {});
    EXPECT_DOUBLE_EQ(q.total, 0.0);
}

TEST(Qoe, LogUtility) {
    const std::vector<int> top(4, 5);
    EXPECT_NEAR(qoe_chunk(1.2 * std::exp(1.0), 1.2 * std::exp(1.0), 0.0, top, 5, {}).utility, 1.0, 1e-12);
}

TEST(Qoe, ViewportAtBaseTier) {
    const std::vector<int> base(6, 0);
    EXPECT_DOUBLE_EQ(viewport_error(base, 5), 1.0);
    EXPECT_DOUBLE_EQ(qoe_chunk(1.2, 1.2, 0.0, base, 5, {}).viewport, 5.0);
}

TEST(Qoe, TotalIsSumOfTerms) {
    const std::vector<int> tiers{1, 3, 5, 2};
    const auto q = qoe_chunk(7.0, 3.0, 0.4, tiers, 5, {});
    EXPECT_DOUBLE_EQ(q.stall, 4.0);
    EXPECT_DOUBLE_EQ(q.smoothness, 2.0);
    EXPECT_NEAR(q.viewport, 5.0 * (1.0 - 11.0 / 20.0), 1e-12);
    EXPECT_DOUBLE_EQ(q.total, q.utility - q.stall - q.smoothness - q.viewport);
}

TEST(Qoe, SwitchMagnitudeOverride) {
    const std::vector<int> tiers{5};
    EXPECT_DOUBLE_EQ(qoe_chunk(7.0, 3.0, 0.0, tiers, 5, {}, 2.0).smoothness, 1.0);
}

TEST(Qoe, RateClampedAtMinimum) {
    const std::vector<int> tiers{5};
    EXPECT_DOUBLE_EQ(qoe_chunk(0.5, 0.5, 0.0, tiers, 5, {}).utility, 0.0);
}

TEST(Qoe, UtilityIncreasesWithRate) {
    const std::vector<int> tiers{2, 3};
    double prev = -1e9;
    for (double r = 1.2; r < 40.0; r += 0.7) {
        const double t = qoe_chunk(r, 5.0, 0.0, tiers, 5, {}, 0.0).total;
        EXPECT_GT(t, prev);
        prev = t;
    }
}

TEST(Qoe, EmptyViewportRejected) {
    EXPECT_THROW(viewport_error(std::vector<int>{}, 5), std::invalid_argument);
}

TEST(HitRatio, Examples) {
    const std::vector<TileSet> a{{1, 2}, {3, 4}};
    EXPECT_DOUBLE_EQ(hit_ratio(a, a), 100.0);
    const std::vector<TileSet> b{{5}, {6}};
    EXPECT_DOUBLE_EQ(hit_ratio(a, b), 0.0);
    // IoU 0.6 and IoU 0.4.
    const std::vector<TileSet> p{{1, 2, 3, 4, 5, 6}, {1, 2, 3, 4}};
    const std::vector<TileSet> t{{1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {1, 2, 5, 6, 7}};
    EXPECT_DOUBLE_EQ(hit_ratio(p, t), 50.0);
}

TEST(HitRatio, LengthMismatch) {
    const std::vector<TileSet> a{{1}};
    const std::vector<TileSet> b{{1}, {2}};
    EXPECT_THROW(hit_ratio(a, b), std::invalid_argument);
}

TEST(Aggregate, PopulationStd) {
    RunStats a;
    a.algorithm = "x";
    a.qoe_mean = 2.0;
    RunStats b = a;
    b.qoe_mean = 4.0;
    b.run_index = 1;
    const std::vector<RunStats> runs{a, b};
    const auto s = aggregate_metrics(runs);
    ASSERT_EQ(s.algorithms.size(), 1u);
    EXPECT_DOUBLE_EQ(s.algorithms[0].qoe_mean, 3.0);
    EXPECT_DOUBLE_EQ(s.algorithms[0].qoe_std, 1.0);
}

TEST(Aggregate, ExcludesFailures) {
    RunStats ok;
    ok.algorithm = "x";
    ok.qoe_mean = 1.0;
    RunStats bad = ok;
    bad.failed = true;
    bad.failure = "boom";
    bad.qoe_mean = 100.0;
    const std::vector<RunStats> runs{ok, bad};
    const auto s = aggregate_metrics(runs);
    EXPECT_DOUBLE_EQ(s.algorithms[0].qoe_mean, 1.0);
    EXPECT_EQ(s.algorithms[0].failures, 1u);
    ASSERT_EQ(s.failures.size(), 1u);
}

TEST(Aggregate, FirstAppearanceOrder) {
    std::vector<RunStats> runs(3);
    runs[0].algorithm = "b";
    runs[1].algorithm = "a";
    runs[2].algorithm = "b";
    const auto s = aggregate_metrics(runs);
    ASSERT_EQ(s.algorithms.size(), 2u);
    EXPECT_EQ(s.algorithms[0].algorithm, "b");
    EXPECT_EQ(s.algorithms[0].runs, 2u);
}

TEST(Cdf, MonotoneAndEndsAtOne) {
    std::vector<double> xs;
    for (int i = 0; i < 37; ++i) xs.push_back(std::sin(i));
    const auto cdf = empirical_cdf(xs);
    ASSERT_EQ(cdf.size(), 100u);
    for (std::size_t i = 1; i < cdf.size(); ++i) {
        EXPECT_GE(cdf[i].first, cdf[i - 1].first);
        EXPECT_GT(cdf[i].second, cdf[i - 1].second);
    }
    EXPECT_DOUBLE_EQ(cdf.back().second, 1.0);
    EXPECT_DOUBLE_EQ(cdf.back().first, *std::max_element(xs.begin(), xs.end()));
}

TEST(Stats, MeanAndStd) {
    const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    EXPECT_DOUBLE_EQ(mean_of(xs), 2.5);
    EXPECT_DOUBLE_EQ(population_std(xs), std::sqrt(1.25));
}
