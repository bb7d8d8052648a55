#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "orbitstream/geometry.hpp"

namespace orbitstream {

enum class ObjectClass { pedestrian, vehicle, traffic_sign, background, other };

inline constexpr std::size_t kObjectClassCount = 5;

/// Unknown labels map to ObjectClass::other.
ObjectClass parse_object_class(std::string_view label);
std::string_view to_string(ObjectClass c);

/// Default semantic mass per class.
struct MassTable {
    std::array<double, kObjectClassCount> mass{1.0, 0.8, 0.75, 0.1, 0.1};

    [[nodiscard]] double operator[](ObjectClass c) const { return mass[static_cast<std::size_t>(c)]; }
    /// Every class at the same mass.
    static MassTable flat(double m = 1.0) { return MassTable{{m, m, m, m, m}}; }
};

double assign_mass(ObjectClass c, const MassTable& table = {});

struct SceneObject {
    std::string id;
    ObjectClass cls = ObjectClass::other;
    SphericalCoord position;
    double mass = 0.0;

    friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct SceneState {
    double timestamp = 0.0;
    std::vector<SceneObject> objects;

    friend bool operator==(const SceneState&, const SceneState&) = default;
};

inline constexpr std::size_t kDefaultMaxObjects = 32;

/// Reads a detection trace (`t_sec,obj_id,class,theta_rad,phi_rad,mass`). Rows sharing a
/// timestamp form one state. An empty mass column takes the table default.
std::vector<SceneState> load_detection_trace(std::istream& in, const MassTable& table = {},
                                             std::size_t max_objects = kDefaultMaxObjects);
std::vector<SceneState> load_detection_trace(const std::filesystem::path& path, const MassTable& table = {},
                                             std::size_t max_objects = kDefaultMaxObjects);
void write_detection_trace(std::ostream& out, const std::vector<SceneState>& states);

// Scripted scenes -----------------------------------------------------------------------------

struct StaticPath {
    SphericalCoord at;
};
struct LinearPath {
    SphericalCoord start;
    double yaw_rate = 0.0;    ///< rad/s
    double pitch_rate = 0.0;  ///< rad/s, pitch clamps at the poles
};
struct Waypoint {
    double t = 0.0;
    SphericalCoord at;
};
struct WaypointPath {
    std::vector<Waypoint> points;  ///< absolute times, strictly increasing
};
using ObjectPath = std::variant<StaticPath, LinearPath, WaypointPath>;

struct ScriptedObject {
    std::string id;
    ObjectClass cls = ObjectClass::other;
    std::optional<double> mass;
    double enter = 0.0;
    double exit = 1e300;
    ObjectPath path;
};

/// How the synthetic operator moves its head; used to build ground-truth gaze.
struct OperatorSpec {
    enum class Mode { track, pan, erratic };
    Mode mode = Mode::track;
    std::optional<SphericalCoord> start;
    double pursuit_gain = 4.0;              ///< 1/s, proportional pursuit toward the target
    double max_speed = deg_to_rad(112.8);   ///< rad/s
    double reaction_s = 0.25;               ///< delay before switching to a new target
    double jitter_rad = deg_to_rad(1.0);    ///< per-sample measurement noise
    double yaw_rate = 0.0;                  ///< pan mode
    double pitch_rate = 0.0;                ///< pan mode
    double dwell_min_s = 0.6;               ///< erratic mode
    double dwell_max_s = 1.4;               ///< erratic mode
    double erratic_pitch = deg_to_rad(30.0);
};

struct SceneScript {
    std::string name;
    double duration = 100.0;
    double sample_interval = 2.0;
    double position_jitter = 0.0;  ///< rad, per-sample detection noise
    std::vector<ScriptedObject> objects;
    OperatorSpec op;
};

SceneScript parse_scene_script(std::string_view json_text);
SceneScript load_scene_script(const std::filesystem::path& path);
std::string dump_scene_script(const SceneScript& script);

/// Position of a scripted object at time t, or nullopt outside [enter, exit).
std::optional<SphericalCoord> scripted_position(const ScriptedObject& obj, double t);

/// Samples the script every `interval` seconds (script.sample_interval when <= 0), over [0, duration).
std::vector<SceneState> generate_scene_script(const SceneScript& script, std::uint64_t seed,
                                              double interval = 0.0, const MassTable& table = {});

/// Removes each object independently with probability p_miss.
std::vector<SceneState> apply_detection_dropout(const std::vector<SceneState>& states, double p_miss,
                                                std::uint64_t seed);

/// All masses set to `mass`.
std::vector<SceneState> flatten_masses(std::vector<SceneState> states, double mass = 1.0);

/// Time-indexed scene with linear interpolation between samples (yaw wrap-aware).
/// Before the first sample the first state holds; after the last, the last.
class SceneTimeline {
public:
    SceneTimeline() = default;
    explicit SceneTimeline(std::vector<SceneState> states);

    [[nodiscard]] SceneState at(double t) const;
    [[nodiscard]] bool empty() const { return states_.empty(); }
    [[nodiscard]] const std::vector<SceneState>& states() const { return states_; }

private:
    std::vector<SceneState> states_;
};

/// Interpolates between two positions along the shorter yaw arc.
SphericalCoord lerp_position(const SphericalCoord& a, const SphericalCoord& b, double w);

}  // namespace orbitstream
