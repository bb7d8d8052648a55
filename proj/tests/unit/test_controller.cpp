#include <cmath>

#include <gtest/gtest.h>

#include "orbitstream/channel.hpp"
#include "orbitstream/controller.hpp"
#include "orbitstream/errors.hpp"

using namespace orbitstream;

TEST(Pd, AtReferenceIsZero) {
    const auto [u, st] = pd_signal(4.0, {}, {}, 2.0);
    EXPECT_DOUBLE_EQ(u, 0.0);
    EXPECT_TRUE(st.initialized);
}

TEST(Pd, ProportionalOnFirstCall) {
    EXPECT_DOUBLE_EQ(pd_signal(5.0, {}, {}, 2.0).first, 0.5);
}

TEST(Pd, DerivativeOnSecondCall) {
    const auto [u1, s1] = pd_signal(5.0, {}, {}, 2.0);
    const auto [u2, s2] = pd_signal(4.0, s1, {}, 2.0);
    EXPECT_DOUBLE_EQ(u1, 0.5);
    EXPECT_NEAR(u2, -0.1, 1e-15);
}

TEST(TargetRate, Equilibrium) {
    const auto [r_star, r] = target_rate(0.0, 7.3, {});
    EXPECT_DOUBLE_EQ(r_star, 0.9 * 7.3);
    EXPECT_DOUBLE_EQ(r, 0.9 * 7.3);
}

TEST(TargetRate, Saturation) {
    const auto [r_star, r] = target_rate(0.5, 10.0, {});
    EXPECT_NEAR(r_star, 10.0 * (1.0 + std::tanh(0.5)) * 0.9, 1e-12);
    EXPECT_NEAR(r_star, 13.16, 0.01);
    EXPECT_DOUBLE_EQ(r, 10.0);
}

TEST(TargetRate, LowerSaturation) {
    const auto [r_star, r] = target_rate(-50.0, 10.0, {});
    EXPECT_LT(r_star, 1e-12);
    EXPECT_GE(r, 0.0);
}

TEST(TargetRate, RejectsNonPositiveCapacity) {
    EXPECT_THROW(target_rate(0.0, 0.0, {}), std::invalid_argument);
    EXPECT_THROW(target_rate(0.0, -1.0, {}), std::invalid_argument);
}

TEST(Ladder, DefaultTiers) {
    const QualityLadder ladder;
    EXPECT_EQ(ladder.levels(), 6);
    EXPECT_EQ(ladder.tiles(), 32);
    EXPECT_DOUBLE_EQ(ladder.tier(5), 40.1);
    EXPECT_DOUBLE_EQ(ladder.per_tile(2, 7), 5.0 / 32.0);
    EXPECT_EQ(ladder.floor_tier(10.0), 3);
    EXPECT_EQ(ladder.floor_tier(9.99), 2);
    EXPECT_EQ(ladder.floor_tier(0.5), 0);
}

TEST(Ladder, RejectsUnsortedTiers) { EXPECT_THROW(QualityLadder({2.0, 1.0}, 4), std::invalid_argument); }

TEST(Ladder, SolidAngleWeightsSumToOne) {
    const TileGrid grid;
    const auto ladder = QualityLadder::solid_angle_weighted(QualityLadder::default_tiers(), grid);
    double total = 0.0;
    for (int k = 0; k < grid.size(); ++k) total += ladder.per_tile(3, k);
    EXPECT_NEAR(total, 10.0, 1e-9);
    EXPECT_LT(ladder.per_tile(3, 0), ladder.per_tile(3, 8));
}

TEST(Allocate, UniformProbabilities) {
    const auto d = allocate_tiles(10.0, ProbabilityMap::uniform(32), QualityLadder{}, {});
    ASSERT_EQ(d.tile_budget.size(), 32u);
    for (double b : d.tile_budget) EXPECT_NEAR(b, 10.0 / 32.0, 1e-12);
    for (int q : d.tile_quality) EXPECT_EQ(q, d.tile_quality.front());
    EXPECT_EQ(d.tile_quality.front(), 3);
}

TEST(Allocate, TwoTileShares) {
    const QualityLadder ladder({1.0, 2.0, 4.0}, 2);
    const auto d = allocate_tiles(10.0, ProbabilityMap{{0.8, 0.2}}, ladder, {});
    EXPECT_NEAR(d.tile_budget[0] / 10.0, 0.8407, 1e-4);
    EXPECT_NEAR(d.tile_budget[1] / 10.0, 0.1593, 1e-4);
}

TEST(Allocate, BelowMinimumTier) {
    const auto d = allocate_tiles(0.5, ProbabilityMap::uniform(32), QualityLadder{}, {});
    for (int q : d.tile_quality) EXPECT_EQ(q, 0);
}

TEST(Allocate, StaysWithinBudgetPlusBase) {
    const QualityLadder ladder;
    std::vector<double> p(32);
    for (int k = 0; k < 32; ++k) p[static_cast<std::size_t>(k)] = 1.0 + k % 5;
    double sum = 0.0;
    for (double x : p) sum += x;
    for (double& x : p) x /= sum;
    for (double r : {0.5, 3.0, 8.0, 20.0, 60.0}) {
        const auto d = allocate_tiles(r, ProbabilityMap{p}, ladder, {});
        double used = 0.0;
        double base = 0.0;
        for (int k = 0; k < 32; ++k) {
            used += ladder.per_tile(d.tile_quality[static_cast<std::size_t>(k)], k);
            base += ladder.per_tile(0, k);
        }
        EXPECT_LE(used, r + base + 1e-9);
    }
}

TEST(Tuning, GainsFromCritical) {
    const auto g = gains_from_critical(0.8333, 3.2);
    EXPECT_NEAR(g.kp, 0.5, 1e-3);
    const auto h = gains_from_critical(0.5 / 0.6, 3.2);
    EXPECT_NEAR(h.kd, 0.2, 1e-12);
}

TEST(Tuning, OscillationDetection) {
    GainSweep sweep;
    std::vector<double> sine;
    for (int i = 0; i < 60; ++i) sine.push_back(std::sin(2.0 * kPi * i * sweep.sample_dt / 8.0));
    EXPECT_NEAR(sustained_oscillation_period(sine, sweep), 8.0, 0.5);
    std::vector<double> flat(60, 1.0);
    EXPECT_DOUBLE_EQ(sustained_oscillation_period(flat, sweep), 0.0);
}

TEST(Tuning, MonotonePlantFails) {
    const GainPlant plant = [](double) {
        std::vector<double> out;
        for (int i = 0; i < 60; ++i) out.push_back(4.0 * (1.0 - std::exp(-0.1 * i)));
        return out;
    };
    EXPECT_THROW(tune_gains(plant), TuningError);
}

TEST(Tuning, DelayedIntegratorPlant) {
    // Buffer integrator with a one-sample actuation delay: oscillates once kp passes a critical value.
    const GainPlant plant = [](double kp) {
        std::vector<double> b{5.0, 5.0};
        for (int i = 0; i < 80; ++i) {
            const double u = -kp * (b[b.size() - 2] - 4.0);
            b.push_back(b.back() + u * 2.0);
        }
        return b;
    };
    const auto g = tune_gains(plant);
    EXPECT_GT(g.k_cr, 0.0);
    EXPECT_GT(g.t_cr, 0.0);
    EXPECT_NEAR(g.kp, 0.6 * g.k_cr, 1e-12);
    EXPECT_NEAR(g.kd, g.kp * g.t_cr / 8.0, 1e-12);
}

TEST(TargetRate, FactorStaysInsideOpenInterval) {
    for (double u : {-1e308, -800.0, -30.0, 0.0, 30.0, 800.0, 1e308}) {
        const double f = saturation_factor(u);
        EXPECT_GT(f, 0.0) << u;
        EXPECT_LT(f, 2.0) << u;
    }
    EXPECT_DOUBLE_EQ(saturation_factor(0.0), 1.0);
    EXPECT_NEAR(saturation_factor(0.5), 1.0 + std::tanh(0.5), 1e-15);
    EXPECT_GT(target_rate(-1e6, kMinCapacity, {}).second, 0.0);
}
