#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "orbitstream/geometry.hpp"

using namespace orbitstream;

TEST(Geometry, WrapAngleRange) {
    EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
    EXPECT_NEAR(wrap_angle(kPi), -kPi, 1e-12);
    EXPECT_NEAR(wrap_angle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-12);
    EXPECT_NEAR(wrap_angle(-5.0 * kPi), -kPi, 1e-12);
}

TEST(Geometry, CoordRejectsPitchOutOfRange) {
    EXPECT_THROW(SphericalCoord(0.0, 2.0), std::invalid_argument);
    EXPECT_NO_THROW(SphericalCoord(0.0, kHalfPi));
}

TEST(Geometry, HaversineKnownDistances) {
    EXPECT_DOUBLE_EQ(haversine_distance({0.0, 0.0}, {0.0, 0.0}), 0.0);
    EXPECT_NEAR(haversine_distance({0.0, 0.0}, {kPi - 1e-12, 0.0}), kPi, 1e-9);
    EXPECT_NEAR(haversine_distance({0.0, 0.0}, {kHalfPi, 0.0}), kHalfPi, 1e-12);
    EXPECT_NEAR(haversine_distance({0.0, kHalfPi}, {2.0, kHalfPi}), 0.0, 1e-12);
}

TEST(Geometry, HaversineWrapsAcrossSeam) {
    const double d = haversine_distance({kPi - 0.05, 0.0}, {-kPi + 0.05, 0.0});
    EXPECT_NEAR(d, 0.1, 1e-12);
}

TEST(Geometry, UnitConversionExamples) {
    const auto a = to_unit({0.0, 0.0});
    EXPECT_NEAR(a.x(), 1.0, 1e-15);
    EXPECT_NEAR(a.y(), 0.0, 1e-15);
    const auto b = to_unit({kHalfPi, 0.0});
    EXPECT_NEAR(b.x(), 0.0, 1e-15);
    EXPECT_NEAR(b.y(), 1.0, 1e-15);
    const auto c = to_unit({1.3, kHalfPi});
    EXPECT_NEAR(c.z(), 1.0, 1e-15);
    EXPECT_NEAR(std::hypot(c.x(), c.y()), 0.0, 1e-15);
}

TEST(Geometry, UnitRoundTrip) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> yaw(-kPi, kPi);
    std::uniform_real_distribution<double> pitch(-1.5, 1.5);
    for (int i = 0; i < 1000; ++i) {
        const SphericalCoord p(yaw(rng), pitch(rng));
        const auto q = to_spherical(to_unit(p));
        EXPECT_NEAR(haversine_distance(p, q), 0.0, 1e-9);
    }
}

TEST(Geometry, UnitVecRejectsZero) { EXPECT_THROW(UnitVec3(Vec3{0, 0, 0}), std::invalid_argument); }

TEST(Geometry, MoveTowardStopsAtTarget) {
    const SphericalCoord a(0.0, 0.0);
    const SphericalCoord b(1.0, 0.0);
    const auto mid = move_toward(a, b, 0.4);
    EXPECT_NEAR(haversine_distance(a, mid), 0.4, 1e-12);
    EXPECT_NEAR(haversine_distance(mid, b), 0.6, 1e-12);
    EXPECT_EQ(move_toward(a, b, 2.0), b);
}

TEST(Geometry, GridLayout) {
    const TileGrid grid;
    EXPECT_EQ(grid.size(), 32);
    // Top-left tile is centered at yaw -pi + pi/8, pitch +pi/2 - pi/8.
    EXPECT_NEAR(grid.center(0).theta(), -kPi + kPi / 8.0, 1e-12);
    EXPECT_NEAR(grid.center(0).phi(), kHalfPi - kPi / 8.0, 1e-12);
    EXPECT_EQ(grid.tile_of(grid.center(13)), 13);
    double total = 0.0;
    for (int k = 0; k < grid.size(); ++k) total += grid.solid_angle(k);
    EXPECT_NEAR(total, 4.0 * kPi, 1e-9);
}

TEST(Geometry, ViewportContainsOwnTile) {
    const TileGrid grid;
    const auto tiles = viewport_tiles(grid.center(0), deg_to_rad(80.0), grid);
    EXPECT_NE(std::find(tiles.begin(), tiles.end(), 0), tiles.end());
}

TEST(Geometry, ViewportWholeSphere) {
    const TileGrid grid;
    EXPECT_EQ(viewport_tiles({0.3, 0.2}, kTwoPi, grid).size(), 32u);
}

TEST(Geometry, ViewportAtNorthPoleIsTopRow) {
    const TileGrid grid;
    const auto tiles = viewport_tiles({0.0, kHalfPi}, deg_to_rad(80.0), grid);
    EXPECT_EQ(tiles, (TileSet{0, 1, 2, 3, 4, 5, 6, 7}));
}

TEST(Geometry, ViewportRejectsBadFov) {
    const TileGrid grid;
    EXPECT_THROW(viewport_tiles({0.0, 0.0}, 0.0, grid), std::invalid_argument);
    EXPECT_THROW(viewport_tiles({0.0, 0.0}, 7.0, grid), std::invalid_argument);
}

TEST(Geometry, IoUExamples) {
    EXPECT_DOUBLE_EQ(tile_set_iou({1, 2, 3}, {1, 2, 3}), 1.0);
    EXPECT_DOUBLE_EQ(tile_set_iou({1, 2}, {3, 4}), 0.0);
    EXPECT_DOUBLE_EQ(tile_set_iou({1, 2, 3}, {2, 3, 4}), 0.5);
    EXPECT_DOUBLE_EQ(tile_set_iou({}, {}), 1.0);
}
