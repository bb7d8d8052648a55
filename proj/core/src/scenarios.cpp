#include "orbitstream/scenarios.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "orbitstream/random.hpp"

namespace orbitstream {

namespace {

constexpr std::uint64_t kSuiteSeed = 0x360u;

struct Draw {
    explicit Draw(std::uint64_t seed) : rng(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    double sign() { return uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0; }
    double deg(double lo, double hi) { return deg_to_rad(uniform(lo, hi)); }
    Rng rng;
};

SphericalCoord at_deg(double yaw, double pitch) { return {deg_to_rad(yaw), deg_to_rad(pitch)}; }

SphericalCoord offset(const SphericalCoord& p, double dyaw, double dpitch) {
    return {p.theta() + dyaw, std::clamp(p.phi() + dpitch, -kHalfPi, kHalfPi)};
}

ScriptedObject object(std::string id, ObjectClass cls, ObjectPath path, double enter = 0.0) {
    ScriptedObject o;
    o.id = std::move(id);
    o.cls = cls;
    o.path = std::move(path);
    o.enter = enter;
    return o;
}

LinearPath walk(const SphericalCoord& start, Draw& d, double min_speed_deg, double max_speed_deg) {
    return {start, d.sign() * d.deg(min_speed_deg, max_speed_deg), d.sign() * d.deg(0.0, 0.2)};
}

SceneScript base_script(std::string name) {
    SceneScript s;
    s.name = std::move(name);
    s.duration = 100.0;
    s.sample_interval = 2.0;
    s.position_jitter = deg_to_rad(0.5);
    return s;
}

SceneScript hazard_script(int i) {
    Draw d(derive_seed(kSuiteSeed, "hazard", static_cast<std::uint64_t>(i)));
    auto s = base_script(fmt::format("hazard-{:02d}", i));
    const auto ped_start = SphericalCoord(d.deg(-180.0, 180.0), d.deg(-15.0, 15.0));
    s.op.mode = OperatorSpec::Mode::track;
    switch (i % 4) {
        case 0:  // lone pedestrian with a background blob
            s.objects.push_back(object("ped", ObjectClass::pedestrian, walk(ped_start, d, 1.0, 5.0)));
            s.objects.push_back(object("bg", ObjectClass::background,
                                       StaticPath{offset(ped_start, d.sign() * d.deg(60.0, 120.0), d.deg(-10.0, 10.0))}));
            break;
        case 1:  // pedestrian, far vehicle and sign
            s.objects.push_back(object("ped", ObjectClass::pedestrian, walk(ped_start, d, 1.0, 4.0)));
            s.objects.push_back(object("car", ObjectClass::vehicle,
                                       walk(offset(ped_start, d.sign() * d.deg(90.0, 150.0), 0.0), d, 3.0, 8.0)));
            s.objects.push_back(object("sign", ObjectClass::traffic_sign,
                                       StaticPath{offset(ped_start, d.sign() * d.deg(100.0, 170.0), d.deg(5.0, 20.0))}));
            break;
        case 2: {  // pedestrian amid clutter
            s.objects.push_back(object("ped", ObjectClass::pedestrian, walk(ped_start, d, 1.0, 3.0)));
            for (int b = 0; b < 3; ++b) {
                s.objects.push_back(object(fmt::format("bg{}", b), ObjectClass::background,
                                           StaticPath{offset(ped_start, d.sign() * d.deg(25.0, 50.0), d.deg(-20.0, 20.0))}));
            }
            s.objects.push_back(object("car", ObjectClass::vehicle,
                                       walk(offset(ped_start, d.sign() * d.deg(80.0, 140.0), 0.0), d, 2.0, 6.0)));
            break;
        }
        default: {  // vehicle tracked until a pedestrian enters
            const double enter = d.uniform(30.0, 60.0);
            s.objects.push_back(object("car", ObjectClass::vehicle, walk(ped_start, d, 1.0, 4.0)));
            auto ped = object("ped", ObjectClass::pedestrian,
                              walk(offset(ped_start, d.sign() * d.deg(60.0, 120.0), d.deg(-10.0, 10.0)), d, 0.5, 3.0),
                              enter);
            s.objects.push_back(std::move(ped));
            s.objects.push_back(object("bg", ObjectClass::background,
                                       StaticPath{offset(ped_start, d.sign() * d.deg(20.0, 40.0), d.deg(-10.0, 10.0))}));
            break;
        }
    }
    return s;
}

}  // namespace

std::vector<SceneScript> hazard_tracking_suite() {
    std::vector<SceneScript> out;
    for (int i = 0; i < 24; ++i) out.push_back(hazard_script(i));
    return out;
}

std::vector<SceneScript> multi_object_hazard_suite() {
    std::vector<SceneScript> out;
    for (int i = 0; i < 24; ++i) {
        if (i % 4 != 0) out.push_back(hazard_script(i));
    }
    return out;
}

std::vector<SceneScript> smooth_panning_suite() {
    std::vector<SceneScript> out;
    for (int i = 0; i < 10; ++i) {
        Draw d(derive_seed(kSuiteSeed, "panning", static_cast<std::uint64_t>(i)));
        auto s = base_script(fmt::format("panning-{:02d}", i));
        s.op.mode = OperatorSpec::Mode::pan;
        s.op.start = SphericalCoord(d.deg(-180.0, 180.0), d.deg(-10.0, 10.0));
        s.op.yaw_rate = d.sign() * d.deg(8.0, 25.0);
        s.op.pitch_rate = d.sign() * d.deg(0.0, 0.1);
        s.objects.push_back(object("sign", ObjectClass::traffic_sign, StaticPath{at_deg(d.uniform(-180, 180), 10.0)}));
        s.objects.push_back(object("car", ObjectClass::vehicle,
                                   LinearPath{at_deg(d.uniform(-180, 180), 0.0), d.sign() * d.deg(2.0, 6.0), 0.0}));
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SceneScript> erratic_suite() {
    std::vector<SceneScript> out;
    for (int i = 0; i < 10; ++i) {
        Draw d(derive_seed(kSuiteSeed, "erratic", static_cast<std::uint64_t>(i)));
        auto s = base_script(fmt::format("erratic-{:02d}", i));
        s.op.mode = OperatorSpec::Mode::erratic;
        s.op.start = SphericalCoord(d.deg(-180.0, 180.0), 0.0);
        const int objects = 2 + i % 3;
        for (int k = 0; k < objects; ++k) {
            const auto cls = k == 0 ? ObjectClass::pedestrian : (k == 1 ? ObjectClass::vehicle : ObjectClass::traffic_sign);
            s.objects.push_back(object(fmt::format("obj{}", k), cls,
                                       walk(SphericalCoord(d.deg(-180.0, 180.0), d.deg(-20.0, 20.0)), d, 0.5, 3.0)));
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SceneScript> close_approach_suite() {
    std::vector<SceneScript> out;
    for (int i = 0; i < 10; ++i) {
        Draw d(derive_seed(kSuiteSeed, "close-approach", static_cast<std::uint64_t>(i)));
        auto s = base_script(fmt::format("close-approach-{:02d}", i));
        s.op.mode = OperatorSpec::Mode::track;
        const auto ped = SphericalCoord(d.deg(-180.0, 180.0), d.deg(-10.0, 10.0));
        s.objects.push_back(object("ped", ObjectClass::pedestrian, walk(ped, d, 0.2, 1.0)));
        // A vehicle whose path crosses the pedestrian around t_cross.
        const double t_cross = d.uniform(20.0, 80.0);
        const double rate = d.sign() * d.deg(4.0, 10.0);
        s.objects.push_back(object("car", ObjectClass::vehicle,
                                   LinearPath{SphericalCoord(ped.theta() - rate * t_cross, ped.phi()), rate, 0.0}));
        out.push_back(std::move(s));
    }
    return out;
}

const std::vector<std::string>& bundled_scene_suite_names() {
    static const std::vector<std::string> names{"hazard", "hazard-multi", "panning", "erratic", "close-approach", "all"};
    return names;
}

std::vector<SceneScript> bundled_scene_suite(std::string_view name) {
    if (name == "hazard") return hazard_tracking_suite();
    if (name == "hazard-multi") return multi_object_hazard_suite();
    if (name == "panning") return smooth_panning_suite();
    if (name == "erratic") return erratic_suite();
    if (name == "close-approach") return close_approach_suite();
    if (name == "all") {
        auto out = hazard_tracking_suite();
        for (auto&& part : {smooth_panning_suite(), erratic_suite(), close_approach_suite()}) {
            out.insert(out.end(), part.begin(), part.end());
        }
        return out;
    }
    throw std::invalid_argument(fmt::format("unknown scene suite '{}'", name));
}

}  // namespace orbitstream
