#include "orbitstream/gvp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "orbitstream/errors.hpp"

namespace orbitstream {

void FieldParams::validate() const {
    if (!(G > 0.0)) throw std::invalid_argument("field: G must be positive");
    if (delta < 0.0 || (delta == 0.0 && !allow_zero_delta)) {
        throw std::invalid_argument("field: delta must be positive (zero only for the singularity ablation)");
    }
    if (!(beta >= 0.0)) throw std::invalid_argument("field: beta must be non-negative");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("field: gamma must lie in [0, 1)");
    if (!(eta > 0.0)) throw std::invalid_argument("field: eta must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("field: sigma must be non-negative");
    if (!(dt > 0.0)) throw std::invalid_argument("field: dt must be positive");
    if (steps_per_chunk < 1) throw std::invalid_argument("field: steps_per_chunk must be >= 1");
    if (!(min_separation >= 0.0)) throw std::invalid_argument("field: min_separation must be non-negative");
}

double ProbabilityMap::entropy() const {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

ProbabilityMap ProbabilityMap::uniform(std::size_t n) {
    return ProbabilityMap{std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

namespace {

// Haversine on the Cartesian embedding: sin(d/2) = |a - b| / 2.
double chord_angle(const Vec3& a, const Vec3& b) {
    return 2.0 * std::asin(std::min(1.0, 0.5 * norm(a - b)));
}

}  // namespace

double potential_at(const SphericalCoord& p, const SceneState& scene, const FieldParams& params) {
    double sum = 0.0;
    for (const auto& o : scene.objects) {
        const double denom = haversine_distance(p, o.position) + params.delta;
        if (denom == 0.0) throw SingularityError("potential evaluated on top of an object with delta = 0");
        sum += o.mass / denom;
    }
    return -params.G * sum;
}

double potential_at(const UnitVec3& g, const SceneState& scene, const FieldParams& params) {
    return potential_at(to_spherical(g), scene, params);
}

FieldEvaluator::FieldEvaluator(const SceneState& scene, const FieldParams& params)
    : G_(params.G), delta_(params.delta), floor_(params.min_separation) {
    dirs_.reserve(scene.objects.size());
    masses_.reserve(scene.objects.size());
    for (const auto& o : scene.objects) {
        dirs_.push_back(to_unit(o.position).vec());
        masses_.push_back(o.mass);
    }
}

double FieldEvaluator::regularized(double d, FieldDiagnostics* diag) const {
    const double r = d + delta_;
    if (r < floor_) {
        if (diag) ++diag->singularities;
        return floor_ > 0.0 ? floor_ : r;
    }
    return r;
}

double FieldEvaluator::potential(const UnitVec3& g, FieldDiagnostics* diag) const {
    double sum = 0.0;
    for (std::size_t l = 0; l < dirs_.size(); ++l) {
        sum += masses_[l] / regularized(chord_angle(g.vec(), dirs_[l]), diag);
    }
    return -G_ * sum;
}

Vec3 FieldEvaluator::gradient(const UnitVec3& g, FieldDiagnostics* diag) const {
    Vec3 grad;
    for (std::size_t l = 0; l < dirs_.size(); ++l) {
        // dd/dg on the sphere is -t/|t| with t the tangent component of the object direction.
        const Vec3 t = project_tangent(dirs_[l], g.vec());
        const double tn = norm(t);
        const double d = chord_angle(g.vec(), dirs_[l]);
        const double r = regularized(d, diag);
        if (tn < 1e-12) continue;
        grad -= t * (G_ * masses_[l] / (r * r * tn));
    }
    return grad;
}

std::vector<double> FieldEvaluator::tile_potentials(const TileGrid& grid, FieldDiagnostics* diag) const {
    std::vector<double> u(static_cast<std::size_t>(grid.size()));
    for (int k = 0; k < grid.size(); ++k) u[static_cast<std::size_t>(k)] = potential(grid.center_unit(k), diag);
    return u;
}

Vec3 potential_gradient(const UnitVec3& g, const SceneState& scene, const FieldParams& params,
                        FieldDiagnostics* diag) {
    return FieldEvaluator(scene, params).gradient(g, diag);
}

ProbabilityMap boltzmann_from_potentials(std::span<const double> potentials, double beta) {
    ProbabilityMap map;
    map.probs.resize(potentials.size());
    if (potentials.empty()) return map;
    // exp(-beta U) is largest where U is smallest; shift by that exponent.
    const double u_min = *std::min_element(potentials.begin(), potentials.end());
    double total = 0.0;
    for (std::size_t k = 0; k < potentials.size(); ++k) {
        map.probs[k] = std::exp(-beta * (potentials[k] - u_min));
        total += map.probs[k];
    }
    for (double& p : map.probs) p /= total;
    return map;
}

ProbabilityMap boltzmann_probs(const SceneState& scene, const TileGrid& grid, const FieldParams& params,
                               FieldDiagnostics* diag) {
    if (grid.size() == 0) throw std::invalid_argument("boltzmann_probs: empty grid");
    const auto u = FieldEvaluator(scene, params).tile_potentials(grid, diag);
    return boltzmann_from_potentials(u, params.beta);
}

namespace {

GazeState step_with(const GazeState& state, const FieldEvaluator& field, const FieldParams& params, Rng& rng,
                    FieldDiagnostics* diag) {
    const Vec3& g = state.g.vec();
    Vec3 v = params.gamma * state.v - params.eta * field.gradient(state.g, diag);
    if (params.sigma > 0.0) {
        std::normal_distribution<double> normal(0.0, 1.0);
        const double nx = normal(rng);
        const double ny = normal(rng);
        const double nz = normal(rng);
        v += std::sqrt(2.0 * params.eta * params.sigma) * project_tangent(Vec3{nx, ny, nz}, g);
    }
    v = project_tangent(v, g);
    GazeState next;
    next.g = UnitVec3(g + params.dt * v);
    next.v = project_tangent(v, next.g.vec());
    return next;
}

}  // namespace

GazeState step_gaze(const GazeState& state, const SceneState& scene, const FieldParams& params, Rng& rng,
                    FieldDiagnostics* diag) {
    return step_with(state, FieldEvaluator(scene, params), params, rng, diag);
}

ViewportPrediction predict_viewport(const GazeState& state, std::span<const SceneState> forecast,
                                    const FieldParams& params, const TileGrid& grid, double fov, Rng& rng,
                                    FieldDiagnostics* diag) {
    const SceneState empty{};
    auto scene_for = [&](std::size_t i) -> const SceneState& {
        if (forecast.empty()) return empty;
        return forecast[std::min(i, forecast.size() - 1)];
    };

    ViewportPrediction out;
    out.state = state;
    const SceneState* current = nullptr;
    std::optional<FieldEvaluator> field;
    for (int i = 0; i < params.steps_per_chunk; ++i) {
        const SceneState& s = scene_for(static_cast<std::size_t>(i));
        if (&s != current) {
            field.emplace(s, params);
            current = &s;
        }
        out.state = step_with(out.state, *field, params, rng, diag);
    }
    const SceneState& last = forecast.empty() ? empty : forecast.back();
    if (&last != current || !field) field.emplace(last, params);
    out.probs = boltzmann_from_potentials(field->tile_potentials(grid, diag), params.beta);
    out.tiles = viewport_tiles(to_spherical(out.state.g), fov, grid);
    return out;
}

}  // namespace orbitstream
