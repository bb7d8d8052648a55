#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "orbitstream/baselines.hpp"

using namespace orbitstream;

namespace {

AbrObservation observe(double buffer, std::vector<double> mbps = {}, int last_tier = -1) {
    AbrObservation o;
    o.buffer = buffer;
    o.last_tier = last_tier;
    for (std::size_t i = 0; i < mbps.size(); ++i) o.throughput_history.push_back({static_cast<int>(i), mbps[i]});
    o.chunk_index = static_cast<int>(mbps.size());
    return o;
}

}  // namespace

TEST(BufferBased, Extremes) {
    const QualityLadder ladder;
    EXPECT_EQ(buffer_based_decide(observe(0.0), ladder).tier, 0);
    EXPECT_EQ(buffer_based_decide(observe(8.0), ladder).tier, 5);
    EXPECT_EQ(buffer_based_decide(observe(9.5), ladder).tier, 5);
}

TEST(BufferBased, Midpoint) {
    // Midpoint of the cushion maps to 20.65 Mbps, which snaps to the 20 Mbps tier.
    EXPECT_EQ(buffer_based_decide(observe(5.0), QualityLadder{}).tier, 4);
}

TEST(RateBased, Examples) {
    const QualityLadder ladder;
    EXPECT_EQ(rate_based_decide(observe(3.0), ladder).tier, 0);
    EXPECT_EQ(rate_based_decide(observe(3.0, {10, 10, 10}), ladder).tier, 3);
    EXPECT_EQ(rate_based_decide(observe(3.0, {4, 12}), ladder).tier, 2);
}

TEST(RateBased, UsesWindow) {
    // Only the last five samples count.
    EXPECT_EQ(rate_based_decide(observe(3.0, {0.5, 50, 50, 50, 50, 50}), QualityLadder{}).tier, 5);
}

TEST(Bola, Extremes) {
    const QualityLadder ladder;
    const auto params = derive_bola_params(ladder, 2.0, 8.0);
    EXPECT_EQ(bola_decide(observe(0.0), ladder, params).tier, 0);
    EXPECT_EQ(bola_decide(observe(10.0), ladder, params).tier, 5);
    EXPECT_EQ(bola_decide(observe(8.0), ladder, params).tier, 5);
}

TEST(Bola, MonotoneInBuffer) {
    const QualityLadder ladder;
    const auto params = derive_bola_params(ladder, 2.0, 8.0);
    int prev = 0;
    for (double b = 0.0; b <= 10.0; b += 0.05) {
        const int t = bola_decide(observe(b), ladder, params).tier;
        EXPECT_GE(t, prev);
        prev = t;
    }
}

TEST(Bola, ScaleInvariance) {
    const QualityLadder ladder;
    std::vector<double> scaled;
    for (double r : ladder.tiers()) scaled.push_back(3.0 * r);
    const QualityLadder big(scaled, 32);
    auto params = derive_bola_params(ladder, 2.0, 8.0);
    for (double b = 0.13; b <= 10.0; b += 0.25) {
        EXPECT_EQ(bola_decide(observe(b), ladder, params).tier, bola_decide(observe(b), big, params).tier);
    }
}

TEST(Mpc, HugeThroughputFullBuffer) {
    MpcParams p;
    p.horizon = 1;
    EXPECT_EQ(mpc_decide(observe(10.0, {1000, 1000}), p, QualityLadder{}).tier, 5);
}

TEST(Mpc, StarvedChannel) {
    const MpcParams p;
    EXPECT_EQ(mpc_decide(observe(0.0, {0.5, 0.5, 0.5}), p, QualityLadder{}).tier, 0);
}

TEST(Mpc, NoHistory) { EXPECT_EQ(mpc_decide(observe(5.0), MpcParams{}, QualityLadder{}).tier, 0); }

TEST(Mpc, PredictedThroughputVariants) {
    const auto o = observe(5.0, {2.0, 4.0, 4.0});
    MpcParams p;
    p.variant = MpcParams::Variant::last;
    EXPECT_DOUBLE_EQ(mpc_predicted_throughput(o, p), 4.0);
    p.variant = MpcParams::Variant::fast;
    EXPECT_DOUBLE_EQ(mpc_predicted_throughput(o, p), 3.0 / (1.0 / 2 + 1.0 / 4 + 1.0 / 4));
    p.variant = MpcParams::Variant::robust;
    // Relative errors against the actual sample: |2 - 4| / 4 = 0.5 and |8/3 - 4| / 4 = 1/3.
    EXPECT_NEAR(mpc_predicted_throughput(o, p), 3.0 / 1.5, 1e-12);
}

TEST(Mpc, RejectsLongHorizon) {
    MpcParams p;
    p.horizon = 9;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Extrapolate, StaticHistory) {
    const TileGrid grid;
    std::vector<GazeSample> h;
    for (int i = 0; i < 10; ++i) h.push_back({0.1 * i, {0.4, 0.2}});
    const auto out = extrapolate_viewport(h, 2.0, grid, deg_to_rad(80.0));
    EXPECT_NEAR(haversine_distance(out.center, {0.4, 0.2}), 0.0, 1e-12);
}

TEST(Extrapolate, ConstantYawRate) {
    const TileGrid grid;
    std::vector<GazeSample> h;
    for (int i = 0; i <= 10; ++i) h.push_back({0.1 * i, {0.5 * 0.1 * i, 0.0}});
    const auto out = extrapolate_viewport(h, 2.0, grid, deg_to_rad(80.0));
    EXPECT_NEAR(out.center.theta(), 0.5 + 1.0, 1e-9);
}

TEST(Extrapolate, CrossesSeam) {
    const TileGrid grid;
    std::vector<GazeSample> h;
    for (int i = 0; i <= 10; ++i) h.push_back({0.1 * i, {wrap_angle(kPi - 0.2 + 0.04 * i), 0.0}});
    const auto out = extrapolate_viewport(h, 1.0, grid, deg_to_rad(80.0));
    EXPECT_NEAR(haversine_distance(out.center, {wrap_angle(kPi - 0.2 + 0.4 + 0.4), 0.0}), 0.0, 1e-9);
}

TEST(Extrapolate, HoldsWithFewSamples) {
    const TileGrid grid;
    const std::vector<GazeSample> one{{0.0, {1.0, 0.1}}};
    EXPECT_EQ(extrapolate_viewport(one, 2.0, grid, deg_to_rad(80.0)).center, SphericalCoord(1.0, 0.1));
}

TEST(Extrapolate, UniformMix) {
    const TileGrid grid;
    ExtrapolationParams p;
    p.uniform_mix = 0.3;
    const std::vector<GazeSample> one{{0.0, {0.0, 0.0}}};
    const auto out = extrapolate_viewport(one, 2.0, grid, deg_to_rad(80.0), p);
    double sum = 0.0;
    for (double q : out.probs.probs) {
        EXPECT_GE(q, 0.3 / 32.0 - 1e-15);
        sum += q;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
}
