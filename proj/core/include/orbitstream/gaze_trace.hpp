#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "orbitstream/geometry.hpp"
#include "orbitstream/scene.hpp"

namespace orbitstream {

struct GazeSample {
    double t = 0.0;
    SphericalCoord at;
};

/// Head-orientation samples, strictly increasing in time. Lookups interpolate along
/// the shorter yaw arc and clamp outside the sampled span.
class GazeTrace {
public:
    GazeTrace() = default;
    explicit GazeTrace(std::vector<GazeSample> samples);

    [[nodiscard]] SphericalCoord at(double t) const;
    /// Samples with time in [t - span, t], oldest first.
    [[nodiscard]] std::vector<GazeSample> window(double t, double span) const;
    [[nodiscard]] const std::vector<GazeSample>& samples() const { return samples_; }
    [[nodiscard]] bool empty() const { return samples_.empty(); }

private:
    std::vector<GazeSample> samples_;
};

/// CSV with header `t_sec,theta_rad,phi_rad`.
GazeTrace load_gaze_trace(std::istream& in);
GazeTrace load_gaze_trace(const std::filesystem::path& path);
void write_gaze_trace(std::ostream& out, const GazeTrace& trace);

/// Ground-truth head motion of a synthetic operator following `op` over the scene, sampled every `dt`.
/// Track mode pursues the heaviest visible object (nearest on ties) after a reaction delay.
GazeTrace synthesize_operator_gaze(const SceneTimeline& scene, const OperatorSpec& op, double duration, double dt,
                                   std::uint64_t seed);

}  // namespace orbitstream
