#include "orbitstream/scene.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "orbitstream/errors.hpp"
#include "orbitstream/random.hpp"
#include "text_util.hpp"

namespace orbitstream {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kObjectClassCount> kClassNames{"pedestrian", "vehicle", "traffic_sign",
                                                                      "background", "other"};

SphericalCoord checked_coord(double theta, double phi, std::string_view where) {
    if (!std::isfinite(theta) || !std::isfinite(phi) || std::abs(phi) > kHalfPi) {
        throw ValidationError(fmt::format("{}: invalid position ({}, {})", where, theta, phi));
    }
    return {theta, phi};
}

}  // namespace

ObjectClass parse_object_class(std::string_view label) {
    label = detail::trim(label);
    for (std::size_t i = 0; i < kClassNames.size(); ++i) {
        if (label == kClassNames[i]) return static_cast<ObjectClass>(i);
    }
    if (label == "person") return ObjectClass::pedestrian;
    if (label == "car" || label == "truck" || label == "bus") return ObjectClass::vehicle;
    if (label == "stop sign" || label == "sign") return ObjectClass::traffic_sign;
    return ObjectClass::other;
}

std::string_view to_string(ObjectClass c) { return kClassNames[static_cast<std::size_t>(c)]; }

double assign_mass(ObjectClass c, const MassTable& table) { return table[c]; }

std::vector<SceneState> load_detection_trace(std::istream& in, const MassTable& table, std::size_t max_objects) {
    std::vector<SceneState> states;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (body.starts_with("t_sec")) continue;
        }
        const auto cols = detail::split_csv(body);
        if (cols.size() < 5 || cols.size() > 6) {
            throw ParseError(fmt::format("line {}: expected 5 or 6 columns, got {}", line_no, cols.size()));
        }
        const double t = detail::require_double(cols[0], line_no, "t_sec");
        SceneObject obj;
        obj.id = std::string(cols[1]);
        if (obj.id.empty()) throw ParseError(fmt::format("line {}: empty obj_id", line_no));
        obj.cls = parse_object_class(cols[2]);
        const double theta = detail::require_double(cols[3], line_no, "theta_rad");
        const double phi = detail::require_double(cols[4], line_no, "phi_rad");
        obj.position = checked_coord(theta, phi, fmt::format("line {}", line_no));
        if (cols.size() == 6 && !cols[5].empty()) {
            obj.mass = detail::require_double(cols[5], line_no, "mass");
            if (obj.mass < 0.0 || obj.mass > 1.0) {
                throw ValidationError(fmt::format("line {}: mass {} outside [0, 1]", line_no, obj.mass));
            }
        } else {
            obj.mass = assign_mass(obj.cls, table);
        }

        if (states.empty() || t > states.back().timestamp) {
            states.push_back(SceneState{t, {}});
        } else if (t < states.back().timestamp) {
            throw ValidationError(fmt::format("line {}: timestamp {} goes backwards (previous {})", line_no, t,
                                              states.back().timestamp));
        }
        auto& objs = states.back().objects;
        if (std::any_of(objs.begin(), objs.end(), [&](const SceneObject& o) { return o.id == obj.id; })) {
            throw ValidationError(fmt::format("line {}: duplicate object '{}' at t={}", line_no, obj.id, t));
        }
        if (objs.size() >= max_objects) {
            throw ValidationError(fmt::format("line {}: more than {} objects at t={}", line_no, max_objects, t));
        }
        objs.push_back(std::move(obj));
    }
    return states;
}

std::vector<SceneState> load_detection_trace(const std::filesystem::path& path, const MassTable& table,
                                             std::size_t max_objects) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open detection trace '{}'", path.string()));
    return load_detection_trace(in, table, max_objects);
}

void write_detection_trace(std::ostream& out, const std::vector<SceneState>& states) {
    out << "t_sec,obj_id,class,theta_rad,phi_rad,mass\n";
    for (const auto& s : states) {
        for (const auto& o : s.objects) {
            out << detail::num(s.timestamp) << ',' << o.id << ',' << to_string(o.cls) << ','
                << detail::num(o.position.theta()) << ',' << detail::num(o.position.phi()) << ','
                << detail::num(o.mass) << '\n';
        }
    }
}

// Script parsing ------------------------------------------------------------------------------

namespace {

SphericalCoord coord_from_json(const json& j, std::string_view where) {
    if (!j.is_array() || j.size() != 2) throw ParseError(fmt::format("{}: expected [theta_rad, phi_rad]", where));
    return checked_coord(j[0].get<double>(), j[1].get<double>(), where);
}

json coord_to_json(const SphericalCoord& c) { return json::array({c.theta(), c.phi()}); }

ObjectPath path_from_json(const json& j, std::string_view where) {
    const auto type = j.at("type").get<std::string>();
    if (type == "static") return StaticPath{coord_from_json(j.at("at"), where)};
    if (type == "linear") {
        return LinearPath{coord_from_json(j.at("start"), where), j.value("yaw_rate", 0.0), j.value("pitch_rate", 0.0)};
    }
    if (type == "waypoints") {
        WaypointPath wp;
        for (const auto& p : j.at("points")) {
            if (!p.is_array() || p.size() != 3) throw ParseError(fmt::format("{}: waypoint must be [t, theta, phi]", where));
            const double t = p[0].get<double>();
            if (!wp.points.empty() && t <= wp.points.back().t) {
                throw ValidationError(fmt::format("{}: waypoint times must increase", where));
            }
            wp.points.push_back({t, checked_coord(p[1].get<double>(), p[2].get<double>(), where)});
        }
        if (wp.points.empty()) throw ValidationError(fmt::format("{}: waypoint path has no points", where));
        return wp;
    }
    throw ParseError(fmt::format("{}: unknown path type '{}'", where, type));
}

json path_to_json(const ObjectPath& path) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, StaticPath>) {
                return {{"type", "static"}, {"at", coord_to_json(p.at)}};
            } else if constexpr (std::is_same_v<T, LinearPath>) {
                return {{"type", "linear"}, {"start", coord_to_json(p.start)}, {"yaw_rate", p.yaw_rate},
                        {"pitch_rate", p.pitch_rate}};
            } else {
                json pts = json::array();
                for (const auto& w : p.points) pts.push_back({w.t, w.at.theta(), w.at.phi()});
                return {{"type", "waypoints"}, {"points", pts}};
            }
        },
        path);
}

OperatorSpec::Mode parse_mode(const std::string& s) {
    if (s == "track") return OperatorSpec::Mode::track;
    if (s == "pan") return OperatorSpec::Mode::pan;
    if (s == "erratic") return OperatorSpec::Mode::erratic;
    throw ParseError(fmt::format("unknown operator mode '{}'", s));
}

std::string_view mode_name(OperatorSpec::Mode m) {
    switch (m) {
        case OperatorSpec::Mode::track: return "track";
        case OperatorSpec::Mode::pan: return "pan";
        case OperatorSpec::Mode::erratic: return "erratic";
    }
    return "track";
}

}  // namespace

SceneScript parse_scene_script(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("scene script: {}", e.what()));
    }
    SceneScript s;
    try {
        s.name = j.value("name", "");
        s.duration = j.value("duration", 100.0);
        s.sample_interval = j.value("sample_interval", 2.0);
        s.position_jitter = j.value("position_jitter", 0.0);
        if (!(s.duration >= 0.0) || !(s.sample_interval > 0.0)) {
            throw ValidationError("scene script: duration must be >= 0 and sample_interval > 0");
        }
        std::set<std::string> ids;
        for (const auto& o : j.value("objects", json::array())) {
            ScriptedObject obj;
            obj.id = o.at("id").get<std::string>();
            if (!ids.insert(obj.id).second) throw ValidationError(fmt::format("scene script: duplicate object id '{}'", obj.id));
            obj.cls = parse_object_class(o.value("class", "other"));
            if (o.contains("mass")) {
                obj.mass = o.at("mass").get<double>();
                if (*obj.mass < 0.0 || *obj.mass > 1.0) {
                    throw ValidationError(fmt::format("scene script: object '{}' mass outside [0, 1]", obj.id));
                }
            }
            obj.enter = o.value("enter", 0.0);
            obj.exit = o.value("exit", 1e300);
            if (obj.exit <= obj.enter) throw ValidationError(fmt::format("scene script: object '{}' exits before it enters", obj.id));
            obj.path = path_from_json(o.at("path"), fmt::format("object '{}'", obj.id));
            s.objects.push_back(std::move(obj));
        }
        if (j.contains("operator")) {
            const auto& op = j.at("operator");
            s.op.mode = parse_mode(op.value("mode", "track"));
            if (op.contains("start")) s.op.start = coord_from_json(op.at("start"), "operator");
            s.op.pursuit_gain = op.value("pursuit_gain", s.op.pursuit_gain);
            s.op.max_speed = op.value("max_speed", s.op.max_speed);
            s.op.reaction_s = op.value("reaction_s", s.op.reaction_s);
            s.op.jitter_rad = op.value("jitter_rad", s.op.jitter_rad);
            s.op.yaw_rate = op.value("yaw_rate", s.op.yaw_rate);
            s.op.pitch_rate = op.value("pitch_rate", s.op.pitch_rate);
            s.op.dwell_min_s = op.value("dwell_min_s", s.op.dwell_min_s);
            s.op.dwell_max_s = op.value("dwell_max_s", s.op.dwell_max_s);
            s.op.erratic_pitch = op.value("erratic_pitch", s.op.erratic_pitch);
        }
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("scene script: {}", e.what()));
    }
    return s;
}

SceneScript load_scene_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open scene script '{}'", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    auto s = parse_scene_script(buf.str());
    if (s.name.empty()) s.name = path.stem().string();
    return s;
}

std::string dump_scene_script(const SceneScript& s) {
    json objs = json::array();
    for (const auto& o : s.objects) {
        json jo{{"id", o.id}, {"class", std::string(to_string(o.cls))}, {"enter", o.enter}, {"path", path_to_json(o.path)}};
        if (o.exit < 1e299) jo["exit"] = o.exit;
        if (o.mass) jo["mass"] = *o.mass;
        objs.push_back(std::move(jo));
    }
    json op{{"mode", std::string(mode_name(s.op.mode))},
            {"pursuit_gain", s.op.pursuit_gain},
            {"max_speed", s.op.max_speed},
            {"reaction_s", s.op.reaction_s},
            {"jitter_rad", s.op.jitter_rad},
            {"yaw_rate", s.op.yaw_rate},
            {"pitch_rate", s.op.pitch_rate},
            {"dwell_min_s", s.op.dwell_min_s},
            {"dwell_max_s", s.op.dwell_max_s},
            {"erratic_pitch", s.op.erratic_pitch}};
    if (s.op.start) op["start"] = coord_to_json(*s.op.start);
    json j{{"name", s.name},
           {"duration", s.duration},
           {"sample_interval", s.sample_interval},
           {"position_jitter", s.position_jitter},
           {"objects", objs},
           {"operator", op}};
    return j.dump(2);
}

// Script sampling ------------------------------------------------------------------------------

SphericalCoord lerp_position(const SphericalCoord& a, const SphericalCoord& b, double w) {
    const double dtheta = wrap_angle(b.theta() - a.theta());
    return {a.theta() + w * dtheta, a.phi() + w * (b.phi() - a.phi())};
}

std::optional<SphericalCoord> scripted_position(const ScriptedObject& obj, double t) {
    if (t < obj.enter || t >= obj.exit) return std::nullopt;
    return std::visit(
        [&](const auto& p) -> SphericalCoord {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, StaticPath>) {
                return p.at;
            } else if constexpr (std::is_same_v<T, LinearPath>) {
                const double dt = t - obj.enter;
                return {p.start.theta() + p.yaw_rate * dt, std::clamp(p.start.phi() + p.pitch_rate * dt, -kHalfPi, kHalfPi)};
            } else {
                const auto& pts = p.points;
                if (t <= pts.front().t) return pts.front().at;
                if (t >= pts.back().t) return pts.back().at;
                auto hi = std::upper_bound(pts.begin(), pts.end(), t, [](double v, const Waypoint& w) { return v < w.t; });
                auto lo = hi - 1;
                return lerp_position(lo->at, hi->at, (t - lo->t) / (hi->t - lo->t));
            }
        },
        obj.path);
}

std::vector<SceneState> generate_scene_script(const SceneScript& script, std::uint64_t seed, double interval,
                                              const MassTable& table) {
    if (interval <= 0.0) interval = script.sample_interval;
    std::set<std::string_view> ids;
    for (const auto& o : script.objects) {
        if (!ids.insert(o.id).second) throw ValidationError(fmt::format("scene script: duplicate object id '{}'", o.id));
    }
    Rng rng(derive_seed(seed, "scene-jitter"));
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::vector<SceneState> states;
    // Integer stepping keeps sample times exact multiples of the interval.
    const auto count = static_cast<std::size_t>(std::ceil(script.duration / interval - 1e-9));
    states.reserve(count);
    for (std::size_t n = 0; n < count; ++n) {
        const double t = static_cast<double>(n) * interval;
        SceneState s{t, {}};
        for (const auto& o : script.objects) {
            auto pos = scripted_position(o, t);
            if (!pos) continue;
            if (script.position_jitter > 0.0) {
                const double dth = script.position_jitter * jitter(rng);
                const double dph = script.position_jitter * jitter(rng);
                pos = SphericalCoord(pos->theta() + dth, std::clamp(pos->phi() + dph, -kHalfPi, kHalfPi));
            }
            s.objects.push_back({o.id, o.cls, *pos, o.mass.value_or(assign_mass(o.cls, table))});
        }
        states.push_back(std::move(s));
    }
    return states;
}

std::vector<SceneState> apply_detection_dropout(const std::vector<SceneState>& states, double p_miss,
                                                std::uint64_t seed) {
    if (!(p_miss >= 0.0 && p_miss <= 1.0)) throw std::invalid_argument("p_miss must lie in [0, 1]");
    Rng rng(derive_seed(seed, "dropout"));
    std::bernoulli_distribution miss(p_miss);
    std::vector<SceneState> out;
    out.reserve(states.size());
    for (const auto& s : states) {
        SceneState kept{s.timestamp, {}};
        for (const auto& o : s.objects) {
            if (!miss(rng)) kept.objects.push_back(o);
        }
        out.push_back(std::move(kept));
    }
    return out;
}

std::vector<SceneState> flatten_masses(std::vector<SceneState> states, double mass) {
    for (auto& s : states) {
        for (auto& o : s.objects) o.mass = mass;
    }
    return states;
}

SceneTimeline::SceneTimeline(std::vector<SceneState> states) : states_(std::move(states)) {
    for (std::size_t i = 1; i < states_.size(); ++i) {
        if (!(states_[i].timestamp > states_[i - 1].timestamp)) {
            throw ValidationError("scene timeline: timestamps must be strictly increasing");
        }
    }
}

SceneState SceneTimeline::at(double t) const {
    if (states_.empty()) return SceneState{t, {}};
    if (t <= states_.front().timestamp) return SceneState{t, states_.front().objects};
    if (t >= states_.back().timestamp) return SceneState{t, states_.back().objects};
    auto hi = std::upper_bound(states_.begin(), states_.end(), t,
                               [](double v, const SceneState& s) { return v < s.timestamp; });
    const auto& b = *hi;
    const auto& a = *(hi - 1);
    const double w = (t - a.timestamp) / (b.timestamp - a.timestamp);
    SceneState out{t, {}};
    out.objects.reserve(a.objects.size());
    // Objects seen in both samples move continuously; others hold until the next sample.
    for (const auto& oa : a.objects) {
        auto it = std::find_if(b.objects.begin(), b.objects.end(), [&](const SceneObject& o) { return o.id == oa.id; });
        if (it == b.objects.end()) {
            out.objects.push_back(oa);
        } else {
            out.objects.push_back({oa.id, oa.cls, lerp_position(oa.position, it->position, w), oa.mass});
        }
    }
    return out;
}

}  // namespace orbitstream
