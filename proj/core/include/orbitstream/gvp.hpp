#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "orbitstream/geometry.hpp"
#include "orbitstream/random.hpp"
#include "orbitstream/scene.hpp"

namespace orbitstream {

/// Constants of the gravitational field and the momentum gaze dynamics.
struct FieldParams {
    double G = 1.0;       ///< saliency weighting
    double delta = 1.0;   ///< distance regularizer (rad)
    double beta = 0.5;    ///< inverse attention temperature
    double gamma = 0.8;   ///< momentum decay, in [0, 1)
    double eta = 0.1;     ///< descent responsiveness
    double sigma = 0.05;  ///< saccade noise volatility
    double dt = 0.1;      ///< SDE step (s)
    int steps_per_chunk = 20;
    /// Permits delta == 0 (singularity ablation only).
    bool allow_zero_delta = false;
    /// Regularized distances d + delta below this are near-singular: counted and clamped.
    double min_separation = 0.05;

    /// Throws std::invalid_argument on violated invariants.
    void validate() const;
};

/// Counters for near-singular field evaluations.
struct FieldDiagnostics {
    std::uint64_t singularities = 0;
};

struct GazeState {
    UnitVec3 g;  ///< gaze direction
    Vec3 v;      ///< tangent velocity

    friend bool operator==(const GazeState&, const GazeState&) = default;
};

struct ProbabilityMap {
    std::vector<double> probs;

    [[nodiscard]] std::size_t size() const { return probs.size(); }
    [[nodiscard]] double operator[](std::size_t k) const { return probs[k]; }
    /// Shannon entropy in nats.
    [[nodiscard]] double entropy() const;
    static ProbabilityMap uniform(std::size_t n);
};

/// U(p) = -G * sum M / (d + delta). Throws SingularityError when d + delta == 0.
double potential_at(const SphericalCoord& p, const SceneState& scene, const FieldParams& params);
double potential_at(const UnitVec3& g, const SceneState& scene, const FieldParams& params);

/// Spherical gradient of U at g, tangent to the sphere. Objects at g or at its antipode
/// contribute nothing (the direction is undefined there).
Vec3 potential_gradient(const UnitVec3& g, const SceneState& scene, const FieldParams& params,
                        FieldDiagnostics* diag = nullptr);

/// Boltzmann map over tile centers, P_k proportional to exp(-beta U_k), max-shifted.
ProbabilityMap boltzmann_probs(const SceneState& scene, const TileGrid& grid, const FieldParams& params,
                               FieldDiagnostics* diag = nullptr);

/// Same map from precomputed potentials.
ProbabilityMap boltzmann_from_potentials(std::span<const double> potentials, double beta);

/// One Euler-Maruyama step with momentum; velocity stays tangent.
GazeState step_gaze(const GazeState& state, const SceneState& scene, const FieldParams& params, Rng& rng,
                    FieldDiagnostics* diag = nullptr);

struct ViewportPrediction {
    GazeState state;
    ProbabilityMap probs;
    TileSet tiles;
};

/// Rolls the gaze across one control period. Sub-step i sees forecast[min(i, size-1)];
/// an empty forecast means an empty scene.
ViewportPrediction predict_viewport(const GazeState& state, std::span<const SceneState> forecast,
                                    const FieldParams& params, const TileGrid& grid, double fov, Rng& rng,
                                    FieldDiagnostics* diag = nullptr);

/// Precomputed object directions for repeated field evaluations against one scene.
class FieldEvaluator {
public:
    FieldEvaluator(const SceneState& scene, const FieldParams& params);

    [[nodiscard]] double potential(const UnitVec3& g, FieldDiagnostics* diag = nullptr) const;
    [[nodiscard]] Vec3 gradient(const UnitVec3& g, FieldDiagnostics* diag = nullptr) const;
    /// Potentials at every tile center of `grid`.
    [[nodiscard]] std::vector<double> tile_potentials(const TileGrid& grid, FieldDiagnostics* diag = nullptr) const;

private:
    [[nodiscard]] double regularized(double d, FieldDiagnostics* diag) const;

    std::vector<Vec3> dirs_;
    std::vector<double> masses_;
    double G_;
    double delta_;
    double floor_;
};

}  // namespace orbitstream
