#include "orbitstream/gaze_trace.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "orbitstream/errors.hpp"
#include "orbitstream/random.hpp"
#include "text_util.hpp"

namespace orbitstream {

GazeTrace::GazeTrace(std::vector<GazeSample> samples) : samples_(std::move(samples)) {
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        if (!(samples_[i].t > samples_[i - 1].t)) throw ValidationError("gaze trace: timestamps must be strictly increasing");
    }
}

SphericalCoord GazeTrace::at(double t) const {
    if (samples_.empty()) return {};
    if (t <= samples_.front().t) return samples_.front().at;
    if (t >= samples_.back().t) return samples_.back().at;
    auto hi = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double v, const GazeSample& s) { return v < s.t; });
    auto lo = hi - 1;
    return lerp_position(lo->at, hi->at, (t - lo->t) / (hi->t - lo->t));
}

std::vector<GazeSample> GazeTrace::window(double t, double span) const {
    std::vector<GazeSample> out;
    const double eps = 1e-9;
    for (const auto& s : samples_) {
        if (s.t > t + eps) break;
        if (s.t >= t - span - eps) out.push_back(s);
    }
    return out;
}

GazeTrace load_gaze_trace(std::istream& in) {
    std::vector<GazeSample> samples;
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
        if (cols.size() != 3) throw ParseError(fmt::format("line {}: expected 3 columns, got {}", line_no, cols.size()));
        const double t = detail::require_double(cols[0], line_no, "t_sec");
        const double theta = detail::require_double(cols[1], line_no, "theta_rad");
        const double phi = detail::require_double(cols[2], line_no, "phi_rad");
        if (std::abs(phi) > kHalfPi) throw ValidationError(fmt::format("line {}: pitch {} outside [-pi/2, pi/2]", line_no, phi));
        if (!samples.empty() && t <= samples.back().t) {
            throw ValidationError(fmt::format("line {}: timestamp {} is not increasing", line_no, t));
        }
        samples.push_back({t, SphericalCoord(theta, phi)});
    }
    return GazeTrace(std::move(samples));
}

GazeTrace load_gaze_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open gaze trace '{}'", path.string()));
    return load_gaze_trace(in);
}

void write_gaze_trace(std::ostream& out, const GazeTrace& trace) {
    out << "t_sec,theta_rad,phi_rad\n";
    for (const auto& s : trace.samples()) {
        out << detail::num(s.t) << ',' << detail::num(s.at.theta()) << ',' << detail::num(s.at.phi()) << '\n';
    }
}

namespace {

const SceneObject* pick_target(const SceneState& scene, const SphericalCoord& gaze) {
    const SceneObject* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& o : scene.objects) {
        const double d = haversine_distance(gaze, o.position);
        if (!best || o.mass > best->mass || (o.mass == best->mass && d < best_d)) {
            best = &o;
            best_d = d;
        }
    }
    return best;
}

}  // namespace

GazeTrace synthesize_operator_gaze(const SceneTimeline& scene, const OperatorSpec& op, double duration, double dt,
                                   std::uint64_t seed) {
    if (!(dt > 0.0)) throw std::invalid_argument("gaze sampling step must be positive");
    Rng rng(derive_seed(seed, "operator"));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const auto count = static_cast<std::size_t>(std::floor(duration / dt + 1e-9)) + 1;
    std::vector<GazeSample> samples;
    samples.reserve(count);

    SphericalCoord clean;
    if (op.start) {
        clean = *op.start;
    } else if (op.mode == OperatorSpec::Mode::track) {
        const auto s0 = scene.at(0.0);
        if (const auto* tgt = pick_target(s0, SphericalCoord{})) clean = tgt->position;
    }
    const SphericalCoord pan_origin = clean;

    std::string target_id;
    std::string pending_id;
    double pending_since = 0.0;
    SphericalCoord erratic_goal = clean;
    double next_saccade = 0.0;

    for (std::size_t n = 0; n < count; ++n) {
        const double t = static_cast<double>(n) * dt;
        switch (op.mode) {
            case OperatorSpec::Mode::pan:
                clean = SphericalCoord(pan_origin.theta() + op.yaw_rate * t,
                                       std::clamp(pan_origin.phi() + op.pitch_rate * t, -kHalfPi, kHalfPi));
                break;
            case OperatorSpec::Mode::erratic: {
                if (t >= next_saccade) {
                    erratic_goal = SphericalCoord(-kPi + kTwoPi * unit(rng), op.erratic_pitch * (2.0 * unit(rng) - 1.0));
                    next_saccade = t + op.dwell_min_s + (op.dwell_max_s - op.dwell_min_s) * unit(rng);
                }
                if (n > 0) clean = move_toward(clean, erratic_goal, op.max_speed * dt);
                break;
            }
            case OperatorSpec::Mode::track: {
                const auto state = scene.at(t);
                const auto* want = pick_target(state, clean);
                if (want) {
                    if (want->id != target_id) {
                        if (pending_id != want->id) {
                            pending_id = want->id;
                            pending_since = t;
                        }
                        if (target_id.empty() || t - pending_since >= op.reaction_s) target_id = want->id;
                    } else {
                        pending_id.clear();
                    }
                }
                const auto it = std::find_if(state.objects.begin(), state.objects.end(),
                                             [&](const SceneObject& o) { return o.id == target_id; });
                if (n > 0 && it != state.objects.end()) {
                    const double d = haversine_distance(clean, it->position);
                    const double speed = std::min(op.max_speed, op.pursuit_gain * d);
                    clean = move_toward(clean, it->position, speed * dt);
                }
                break;
            }
        }
        SphericalCoord observed = clean;
        if (op.jitter_rad > 0.0) {
            const double dth = op.jitter_rad * noise(rng);
            const double dph = op.jitter_rad * noise(rng);
            observed = SphericalCoord(clean.theta() + dth, std::clamp(clean.phi() + dph, -kHalfPi, kHalfPi));
        }
        samples.push_back({t, observed});
    }
    return GazeTrace(std::move(samples));
}

}  // namespace orbitstream
