#include "orbitstream/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "orbitstream/errors.hpp"
#include "text_util.hpp"

namespace orbitstream {

NetworkTrace::NetworkTrace(std::string name, Kind kind, std::vector<TraceSample> samples, double span)
    : name_(std::move(name)), kind_(kind), samples_(std::move(samples)) {
    if (samples_.empty()) throw ValidationError(fmt::format("trace '{}': no samples", name_));
    if (samples_.front().t != 0.0) throw ValidationError(fmt::format("trace '{}': first sample must be at t = 0", name_));
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (i > 0 && !(samples_[i].t > samples_[i - 1].t)) {
            throw ValidationError(fmt::format("trace '{}': time not strictly increasing at sample {}", name_, i));
        }
        if (!std::isfinite(samples_[i].mbps)) throw ValidationError(fmt::format("trace '{}': non-finite capacity", name_));
        if (samples_[i].mbps < kMinCapacity) {
            samples_[i].mbps = kMinCapacity;
            ++floored_;
        }
    }
    if (span > 0.0) {
        span_ = span;
    } else if (samples_.size() == 1) {
        span_ = 1.0;
    } else {
        const auto n = samples_.size();
        span_ = samples_[n - 1].t + (samples_[n - 1].t - samples_[n - 2].t);
    }
    if (!(span_ > samples_.back().t)) throw ValidationError(fmt::format("trace '{}': span must exceed the last sample time", name_));
}

std::size_t NetworkTrace::segment_index(double local_t) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), local_t,
                               [](double v, const TraceSample& s) { return v < s.t; });
    return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - samples_.begin()) - 1));
}

double NetworkTrace::segment_end(std::size_t i) const {
    return i + 1 < samples_.size() ? samples_[i + 1].t : span_;
}

double NetworkTrace::capacity_at(double t) const {
    double local = std::fmod(t, span_);
    if (local < 0.0) local += span_;
    return samples_[segment_index(local)].mbps;
}

double NetworkTrace::integrate_local(double t0, double t1) const {
    double total = 0.0;
    for (std::size_t i = segment_index(t0); i < samples_.size() && samples_[i].t < t1; ++i) {
        const double a = std::max(t0, samples_[i].t);
        const double b = std::min(t1, segment_end(i));
        if (b > a) total += samples_[i].mbps * (b - a);
    }
    return total;
}

double NetworkTrace::integrate(double t0, double t1) const {
    if (t1 <= t0) return 0.0;
    const double full = integrate_local(0.0, span_);
    const double k0 = std::floor(t0 / span_);
    const double k1 = std::floor(t1 / span_);
    const double l0 = t0 - k0 * span_;
    const double l1 = t1 - k1 * span_;
    if (k0 == k1) return integrate_local(l0, l1);
    return integrate_local(l0, span_) + (k1 - k0 - 1.0) * full + integrate_local(0.0, l1);
}

double NetworkTrace::mean_capacity(double t0, double t1) const {
    if (t1 <= t0) return capacity_at(t0);
    return integrate(t0, t1) / (t1 - t0);
}

double NetworkTrace::download_time(double t0, double mbits) const {
    if (mbits <= 0.0) return 0.0;
    const double k0 = std::floor(t0 / span_);
    double local = t0 - k0 * span_;
    double remaining = mbits;
    double elapsed = 0.0;
    bool skipped = false;
    while (true) {
        const std::size_t start = segment_index(local);
        for (std::size_t i = start; i < samples_.size(); ++i) {
            const double a = std::max(local, samples_[i].t);
            const double len = segment_end(i) - a;
            const double cap = samples_[i].mbps * len;
            if (cap >= remaining) return elapsed + remaining / samples_[i].mbps;
            remaining -= cap;
            elapsed += len;
        }
        local = 0.0;
        if (!skipped) {
            // Jump over whole spans in one go.
            const double full = integrate_local(0.0, span_);
            const double spans = std::floor(remaining / full);
            if (spans >= 1.0) {
                remaining -= spans * full;
                elapsed += spans * span_;
            }
            skipped = true;
            if (remaining <= 0.0) return elapsed;
        }
    }
}

double NetworkTrace::mean() const { return integrate_local(0.0, span_) / span_; }

double NetworkTrace::stddev() const {
    const double m = mean();
    double acc = 0.0;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const double d = samples_[i].mbps - m;
        acc += d * d * (segment_end(i) - samples_[i].t);
    }
    return std::sqrt(acc / span_);
}

NetworkTrace NetworkTrace::scaled(double factor) const {
    if (!(factor > 0.0)) throw std::invalid_argument("trace scale factor must be positive");
    auto s = samples_;
    for (auto& x : s) x.mbps *= factor;
    return NetworkTrace(name_, kind_, std::move(s), span_);
}

std::string_view to_string(NetworkTrace::Kind k) {
    switch (k) {
        case NetworkTrace::Kind::mobile: return "mobile";
        case NetworkTrace::Kind::broadband: return "broadband";
        case NetworkTrace::Kind::synthetic: return "synthetic";
    }
    return "synthetic";
}

NetworkTrace::Kind parse_trace_kind(std::string_view s) {
    if (s == "mobile") return NetworkTrace::Kind::mobile;
    if (s == "broadband") return NetworkTrace::Kind::broadband;
    if (s == "synthetic") return NetworkTrace::Kind::synthetic;
    throw ParseError(fmt::format("unknown trace kind '{}'", s));
}

NetworkTrace load_network_trace(std::istream& in, std::string name, NetworkTrace::Kind kind) {
    std::vector<TraceSample> samples;
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
        if (cols.size() != 2) throw ParseError(fmt::format("line {}: expected 2 columns, got {}", line_no, cols.size()));
        const double t = detail::require_double(cols[0], line_no, "t_sec");
        const double c = detail::require_double(cols[1], line_no, "mbps");
        if (!samples.empty() && !(t > samples.back().t)) {
            throw ValidationError(fmt::format("line {}: time {} is not increasing", line_no, t));
        }
        samples.push_back({t, c});
    }
    return NetworkTrace(std::move(name), kind, std::move(samples));
}

NetworkTrace load_network_trace(const std::filesystem::path& path, NetworkTrace::Kind kind) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open network trace '{}'", path.string()));
    return load_network_trace(in, path.stem().string(), kind);
}

void write_network_trace(std::ostream& out, const NetworkTrace& trace) {
    out << "t_sec,mbps\n";
    for (const auto& s : trace.samples()) out << detail::num(s.t) << ',' << detail::num(s.mbps) << '\n';
}

void ScalingParams::validate() const {
    if (!(global_scale > 0.0)) throw std::invalid_argument("scaling: global_scale must be positive");
    if (!(per_run_std >= 0.0)) throw std::invalid_argument("scaling: per_run_std must be non-negative");
    if (!(clip_lo > 0.0 && clip_hi >= clip_lo)) throw std::invalid_argument("scaling: need 0 < clip_lo <= clip_hi");
}

double clip_scale(double s, const ScalingParams& params) { return std::clamp(s, params.clip_lo, params.clip_hi); }

double draw_run_scale(const ScalingParams& params, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "trace-scale"));
    std::normal_distribution<double> normal(params.per_run_mean, params.per_run_std);
    return clip_scale(params.per_run_std > 0.0 ? normal(rng) : params.per_run_mean, params);
}

NetworkTrace scale_trace(const NetworkTrace& trace, const ScalingParams& params, std::uint64_t seed) {
    params.validate();
    return trace.scaled(params.global_scale * draw_run_scale(params, seed));
}

NetworkTrace synth_stress_trace(const StressSpec& spec, std::string name) {
    if (!(spec.duration > 0.0) || !(spec.sample_dt > 0.0)) throw std::invalid_argument("stress trace: bad duration");
    const auto n = static_cast<std::size_t>(std::ceil(spec.duration / spec.sample_dt - 1e-9));
    std::vector<TraceSample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * spec.sample_dt;
        double c = spec.level_a;
        switch (spec.kind) {
            case StressSpec::Kind::step:
                c = t < spec.t_event ? spec.level_a : spec.level_b;
                break;
            case StressSpec::Kind::fade: {
                const double w = spec.window > 0.0 ? std::clamp((t - spec.t_event) / spec.window, 0.0, 1.0)
                                                   : (t < spec.t_event ? 0.0 : 1.0);
                c = spec.level_a + w * (spec.level_b - spec.level_a);
                break;
            }
            case StressSpec::Kind::collapse:
                c = (t >= spec.t_event && t < spec.t_event + spec.window) ? spec.level_b : spec.level_a;
                break;
        }
        samples.push_back({t, c});
    }
    if (name.empty()) {
        static constexpr std::string_view names[] = {"step", "fade", "collapse"};
        name = std::string(names[static_cast<int>(spec.kind)]);
    }
    return NetworkTrace(std::move(name), NetworkTrace::Kind::synthetic, std::move(samples),
                        static_cast<double>(n) * spec.sample_dt);
}

double harmonic_mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double inv = 0.0;
    for (double x : xs) {
        if (!(x > 0.0)) throw std::invalid_argument("harmonic_mean: values must be positive");
        inv += 1.0 / x;
    }
    return static_cast<double>(xs.size()) / inv;
}

CapacityEstimate estimate_from_throughputs(std::span<const double> throughputs, const EstimatorParams& params,
                                           Rng& rng) {
    CapacityEstimate est;
    est.base = std::max(harmonic_mean(throughputs), kMinCapacity);
    est.epsilon_bound = std::min(params.epsilon_bound, params.relative_cap * est.base);
    double noise = 0.0;
    if (est.epsilon_bound > 0.0) {
        std::uniform_real_distribution<double> u(-est.epsilon_bound, est.epsilon_bound);
        noise = u(rng);
    }
    est.c_hat = std::max(est.base + noise, kMinCapacity);
    return est;
}

CapacityEstimate estimate_capacity(const NetworkTrace& trace, double t, const EstimatorParams& params,
                                   std::uint64_t seed) {
    if (!(params.window > 0.0) || !(params.segment > 0.0)) throw std::invalid_argument("estimator: window must be positive");
    const double start = std::max(0.0, t - params.window);
    const double end = std::max(start + params.window, t);
    const auto bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.window / params.segment)));
    const double width = (end - start) / static_cast<double>(bins);
    std::vector<double> tp(bins);
    for (std::size_t i = 0; i < bins; ++i) {
        tp[i] = trace.mean_capacity(start + width * static_cast<double>(i), start + width * static_cast<double>(i + 1));
    }
    Rng rng(derive_seed(seed, "capacity-estimate"));
    return estimate_from_throughputs(tp, params, rng);
}

NetworkTrace generate_mobile_trace(std::string name, std::uint64_t seed, double duration, double mean, double std,
                                   double ar, double floor) {
    Rng rng(derive_seed(seed, "mobile-trace"));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n = static_cast<std::size_t>(duration);
    std::vector<double> x(n);
    double state = normal(rng);
    const double innov = std::sqrt(1.0 - ar * ar);
    for (auto& v : x) {
        v = state;
        state = ar * state + innov * normal(rng);
    }
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - m) * (v - m);
    const double sd = std::sqrt(var / static_cast<double>(n));
    std::vector<TraceSample> samples(n);
    for (std::size_t i = 0; i < n; ++i) {
        samples[i] = {static_cast<double>(i), std::max(floor, mean + std * (x[i] - m) / sd)};
    }
    return NetworkTrace(std::move(name), NetworkTrace::Kind::mobile, std::move(samples), static_cast<double>(n));
}

NetworkTrace generate_broadband_trace(std::string name, std::uint64_t seed, double level, double jitter,
                                      double duration) {
    Rng rng(derive_seed(seed, "broadband-trace"));
    std::normal_distribution<double> normal(0.0, jitter);
    const auto n = static_cast<std::size_t>(duration);
    std::vector<TraceSample> samples(n);
    for (std::size_t i = 0; i < n; ++i) samples[i] = {static_cast<double>(i), level * std::max(0.5, 1.0 + normal(rng))};
    return NetworkTrace(std::move(name), NetworkTrace::Kind::broadband, std::move(samples), static_cast<double>(n));
}

std::vector<NetworkTrace> bundled_network_suite(std::uint64_t seed) {
    std::vector<NetworkTrace> suite;
    for (int i = 0; i < 4; ++i) {
        suite.push_back(generate_mobile_trace(fmt::format("hsdpa-{}", i), derive_seed(seed, "mobile", i)));
    }
    const double broadband_levels[] = {40.0, 60.0, 80.0};
    for (int i = 0; i < 3; ++i) {
        suite.push_back(generate_broadband_trace(fmt::format("broadband-{}", i), derive_seed(seed, "broadband", i),
                                                 broadband_levels[i]));
    }
    suite.push_back(synth_stress_trace({StressSpec::Kind::step, 100.0, 20.0, 5.0, 50.0, 0.0, 1.0}, "stress-step"));
    suite.push_back(synth_stress_trace({StressSpec::Kind::fade, 100.0, 25.0, 4.0, 20.0, 60.0, 1.0}, "stress-fade"));
    suite.push_back(synth_stress_trace({StressSpec::Kind::collapse, 100.0, 15.0, 0.5, 45.0, 10.0, 1.0}, "stress-collapse"));
    return suite;
}

}  // namespace orbitstream
