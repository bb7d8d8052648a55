#include "orbitstream/geometry.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace orbitstream {

double wrap_angle(double theta) {
    if (theta >= -kPi && theta < kPi) return theta;
    double wrapped = theta - kTwoPi * std::floor((theta + kPi) / kTwoPi);
    // floor() can leave the value exactly at +pi through rounding.
    if (wrapped >= kPi) wrapped -= kTwoPi;
    if (wrapped < -kPi) wrapped = -kPi;
    return wrapped;
}

SphericalCoord::SphericalCoord(double theta, double phi) : theta_(wrap_angle(theta)), phi_(phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi)) throw std::invalid_argument("non-finite spherical coordinate");
    if (std::abs(phi) > kHalfPi) throw std::invalid_argument("pitch outside [-pi/2, pi/2]");
}

UnitVec3::UnitVec3(const Vec3& v) {
    const double n = norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("cannot normalize a zero or non-finite vector");
    v_ = v * (1.0 / n);
}

UnitVec3 to_unit(const SphericalCoord& p) {
    const double cp = std::cos(p.phi());
    return UnitVec3(Vec3{cp * std::cos(p.theta()), cp * std::sin(p.theta()), std::sin(p.phi())});
}

SphericalCoord to_spherical(const UnitVec3& u) {
    const double z = std::clamp(u.z(), -1.0, 1.0);
    const double horiz = std::hypot(u.x(), u.y());
    if (horiz == 0.0) return {0.0, z > 0 ? kHalfPi : -kHalfPi};
    return {std::atan2(u.y(), u.x()), std::atan2(z, horiz)};
}

double haversine_distance(double theta1, double phi1, double theta2, double phi2) {
    const double s_phi = std::sin(0.5 * (phi2 - phi1));
    const double s_theta = std::sin(0.5 * (theta2 - theta1));
    const double h = s_phi * s_phi + std::cos(phi1) * std::cos(phi2) * s_theta * s_theta;
    return 2.0 * std::asin(std::sqrt(std::clamp(h, 0.0, 1.0)));
}

double haversine_distance(const SphericalCoord& a, const SphericalCoord& b) {
    return haversine_distance(a.theta(), a.phi(), b.theta(), b.phi());
}

SphericalCoord move_toward(const SphericalCoord& from, const SphericalCoord& to, double angle) {
    const double d = haversine_distance(from, to);
    if (angle >= d || d == 0.0) return to;
    if (angle <= 0.0) return from;
    const Vec3 a = to_unit(from).vec();
    const Vec3 b = to_unit(to).vec();
    // Orthonormal direction toward b inside the plane of the great circle.
    const Vec3 perp = project_tangent(b, a);
    const double pn = norm(perp);
    if (pn < 1e-15) return to;  // antipodal: any great circle works, take the direct jump
    const Vec3 dir = perp * (1.0 / pn);
    return to_spherical(UnitVec3(a * std::cos(angle) + dir * std::sin(angle)));
}

TileGrid::TileGrid(int cols, int rows) : cols_(cols), rows_(rows) {
    if (cols <= 0 || rows <= 0) throw std::invalid_argument("tile grid needs positive dimensions");
    centers_.reserve(static_cast<std::size_t>(size()));
    units_.reserve(static_cast<std::size_t>(size()));
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < cols; ++i) {
            SphericalCoord c(-kPi + (kTwoPi / cols) * (i + 0.5), kHalfPi - (kPi / rows) * (j + 0.5));
            centers_.push_back(c);
            units_.push_back(to_unit(c));
        }
    }
}

int TileGrid::tile_of(const SphericalCoord& p) const {
    const int col = std::clamp(static_cast<int>(std::floor((p.theta() + kPi) / (kTwoPi / cols_))), 0, cols_ - 1);
    const int row = std::clamp(static_cast<int>(std::floor((kHalfPi - p.phi()) / (kPi / rows_))), 0, rows_ - 1);
    return index(col, row);
}

double TileGrid::solid_angle(int k) const {
    const int row = k / cols_;
    const double top = kHalfPi - (kPi / rows_) * row;
    const double bottom = top - kPi / rows_;
    return (kTwoPi / cols_) * (std::sin(top) - std::sin(bottom));
}

TileSet viewport_tiles(const SphericalCoord& center, double fov, const TileGrid& grid) {
    if (!(fov > 0.0) || fov > kTwoPi + 1e-12) throw std::invalid_argument("fov must lie in (0, 2pi]");
    const double radius = 0.5 * fov;
    TileSet tiles;
    for (int k = 0; k < grid.size(); ++k) {
        if (haversine_distance(center, grid.center(k)) <= radius) tiles.push_back(k);
    }
    return tiles;
}

double tile_set_iou(const TileSet& a, const TileSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    TileSet inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    const auto uni = a.size() + b.size() - inter.size();
    return static_cast<double>(inter.size()) / static_cast<double>(uni);
}

}  // namespace orbitstream
