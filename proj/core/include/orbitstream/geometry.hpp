#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace orbitstream {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Wraps an angle into [-pi, pi).
double wrap_angle(double theta);

/// Yaw/pitch on the unit sphere. Yaw is kept in [-pi, pi), pitch in [-pi/2, pi/2].
class SphericalCoord {
public:
    SphericalCoord() = default;
    /// Normalizes theta; pitch outside [-pi/2, pi/2] throws std::invalid_argument.
    SphericalCoord(double theta, double phi);

    [[nodiscard]] double theta() const { return theta_; }
    [[nodiscard]] double phi() const { return phi_; }

    friend bool operator==(const SphericalCoord&, const SphericalCoord&) = default;

private:
    double theta_ = 0.0;
    double phi_ = 0.0;
};

/// Plain 3-vector used both for unit directions and tangent vectors.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Removes the component of `v` along the unit vector `g`.
inline Vec3 project_tangent(const Vec3& v, const Vec3& g) { return v - dot(v, g) * g; }

/// A direction on the unit sphere; construction normalizes.
class UnitVec3 {
public:
    UnitVec3() = default;
    /// Throws std::invalid_argument for zero or non-finite input.
    explicit UnitVec3(const Vec3& v);

    [[nodiscard]] const Vec3& vec() const { return v_; }
    [[nodiscard]] double x() const { return v_.x; }
    [[nodiscard]] double y() const { return v_.y; }
    [[nodiscard]] double z() const { return v_.z; }

    friend bool operator==(const UnitVec3&, const UnitVec3&) = default;

private:
    Vec3 v_{1.0, 0.0, 0.0};
};

/// x = cos(phi)cos(theta), y = cos(phi)sin(theta), z = sin(phi).
UnitVec3 to_unit(const SphericalCoord& p);
/// Inverse of to_unit. At the poles theta is reported as 0.
SphericalCoord to_spherical(const UnitVec3& u);

/// Point reached by moving `angle` radians from `from` toward `to` along the great circle.
/// Returns `to` when angle covers the whole distance.
SphericalCoord move_toward(const SphericalCoord& from, const SphericalCoord& to, double angle);

/// Great-circle distance via the haversine form, in [0, pi].
double haversine_distance(const SphericalCoord& a, const SphericalCoord& b);
/// Same metric evaluated on raw angles; skips the coordinate normalization.
double haversine_distance(double theta1, double phi1, double theta2, double phi2);

/// Sorted, duplicate-free list of tile indices.
using TileSet = std::vector<int>;

/// Equirectangular tile grid, row-major from the top-left (yaw -pi, pitch +pi/2).
class TileGrid {
public:
    TileGrid() : TileGrid(8, 4) {}
    TileGrid(int cols, int rows);

    [[nodiscard]] int cols() const { return cols_; }
    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int size() const { return cols_ * rows_; }
    [[nodiscard]] int index(int col, int row) const { return row * cols_ + col; }
    [[nodiscard]] const SphericalCoord& center(int k) const { return centers_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] std::span<const SphericalCoord> centers() const { return centers_; }
    [[nodiscard]] const UnitVec3& center_unit(int k) const { return units_[static_cast<std::size_t>(k)]; }
    /// Tile containing a point (by yaw/pitch bin).
    [[nodiscard]] int tile_of(const SphericalCoord& p) const;
    /// Exact solid angle of tile k in steradians.
    [[nodiscard]] double solid_angle(int k) const;

private:
    int cols_;
    int rows_;
    std::vector<SphericalCoord> centers_;
    std::vector<UnitVec3> units_;
};

/// Tiles whose centers lie within fov/2 of `center`. Requires fov in (0, 2pi].
TileSet viewport_tiles(const SphericalCoord& center, double fov, const TileGrid& grid);

/// |a & b| / |a | b|, 1 when both are empty. Inputs must be sorted.
double tile_set_iou(const TileSet& a, const TileSet& b);

}  // namespace orbitstream
