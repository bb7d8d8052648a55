#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "orbitstream/scene.hpp"

namespace orbitstream {

/// Operator tracks hazards: walking pedestrians, crossing vehicles, a pedestrian entering mid-scene. 24 scripts.
std::vector<SceneScript> hazard_tracking_suite();
/// The hazard scripts with more than one relevant object.
std::vector<SceneScript> multi_object_hazard_suite();
/// Operator pans at a constant rate. 10 scripts.
std::vector<SceneScript> smooth_panning_suite();
/// Operator saccades to random points, ignoring the scene. 10 scripts.
std::vector<SceneScript> erratic_suite();
/// Objects pass through the tracked target. 10 scripts.
std::vector<SceneScript> close_approach_suite();

/// Suite by name: hazard, hazard-multi, panning, erratic, close-approach, all.
std::vector<SceneScript> bundled_scene_suite(std::string_view name);
const std::vector<std::string>& bundled_scene_suite_names();

}  // namespace orbitstream
