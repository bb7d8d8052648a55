#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "orbitstream/random.hpp"

namespace orbitstream {

inline constexpr double kMinCapacity = 0.01;  ///< Mbps floor for every capacity sample

struct TraceSample {
    double t = 0.0;     ///< s
    double mbps = 0.0;

    friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

/// Piecewise-constant capacity C(t) that loops after `span()` seconds.
class NetworkTrace {
public:
    enum class Kind { mobile, broadband, synthetic };

    NetworkTrace() = default;
    /// Validates strictly increasing times starting at 0 and floors capacity at kMinCapacity.
    /// `span` <= 0 means: last sample time plus the previous sample interval (1 s for one sample).
    NetworkTrace(std::string name, Kind kind, std::vector<TraceSample> samples, double span = 0.0);

    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] const std::vector<TraceSample>& samples() const { return samples_; }
    [[nodiscard]] double span() const { return span_; }
    /// Number of samples raised to the capacity floor during construction.
    [[nodiscard]] std::size_t floored() const { return floored_; }

    [[nodiscard]] double capacity_at(double t) const;
    /// Megabits deliverable over [t0, t1].
    [[nodiscard]] double integrate(double t0, double t1) const;
    [[nodiscard]] double mean_capacity(double t0, double t1) const;
    /// Time needed from t0 to deliver `mbits`.
    [[nodiscard]] double download_time(double t0, double mbits) const;
    /// Time-weighted mean and standard deviation over one span.
    [[nodiscard]] double mean() const;
    [[nodiscard]] double stddev() const;

    /// Copy with every sample multiplied by `factor` (> 0).
    [[nodiscard]] NetworkTrace scaled(double factor) const;

private:
    [[nodiscard]] std::size_t segment_index(double local_t) const;
    [[nodiscard]] double segment_end(std::size_t i) const;
    [[nodiscard]] double integrate_local(double t0, double t1) const;

    std::string name_;
    Kind kind_ = Kind::synthetic;
    std::vector<TraceSample> samples_;
    double span_ = 0.0;
    std::size_t floored_ = 0;
};

std::string_view to_string(NetworkTrace::Kind k);
NetworkTrace::Kind parse_trace_kind(std::string_view s);

/// CSV with header `t_sec,mbps`. Non-positive capacity is floored (see NetworkTrace::floored()).
NetworkTrace load_network_trace(std::istream& in, std::string name, NetworkTrace::Kind kind);
NetworkTrace load_network_trace(const std::filesystem::path& path, NetworkTrace::Kind kind);
void write_network_trace(std::ostream& out, const NetworkTrace& trace);

struct ScalingParams {
    double global_scale = 0.6;
    double per_run_mean = 1.0;
    double per_run_std = 0.15;
    double clip_lo = 0.5;
    double clip_hi = 2.0;

    void validate() const;
};

double clip_scale(double s, const ScalingParams& params);
/// One clipped per-run draw s ~ N(mean, std).
double draw_run_scale(const ScalingParams& params, std::uint64_t seed);
/// Multiplies every sample by global_scale * s for the per-run draw s.
NetworkTrace scale_trace(const NetworkTrace& trace, const ScalingParams& params, std::uint64_t seed);

struct StressSpec {
    enum class Kind { step, fade, collapse };
    Kind kind = Kind::step;
    double duration = 100.0;
    double level_a = 20.0;    ///< Mbps before the event
    double level_b = 5.0;     ///< Mbps after the step / end of fade / during collapse
    double t_event = 50.0;    ///< step time, fade start, or collapse start
    double window = 10.0;     ///< fade length or collapse length
    double sample_dt = 1.0;
};

NetworkTrace synth_stress_trace(const StressSpec& spec, std::string name = {});

struct EstimatorParams {
    double window = 6.0;          ///< s
    double segment = 2.0;         ///< bin width for per-chunk throughputs
    double epsilon_bound = 2.0;   ///< Mbps
    double relative_cap = 0.2;    ///< noise bound as a fraction of the base estimate
};

struct CapacityEstimate {
    double c_hat = 0.0;          ///< noisy estimate (Mbps)
    double base = 0.0;           ///< harmonic-mean estimate before noise
    double epsilon_bound = 0.0;  ///< bound actually applied to the noise
};

double harmonic_mean(std::span<const double> xs);

/// Harmonic mean of `throughputs` plus uniform noise within min(epsilon_bound, relative_cap * base).
CapacityEstimate estimate_from_throughputs(std::span<const double> throughputs, const EstimatorParams& params, Rng& rng);

/// Estimate at time t from the trace: per-segment mean capacities over [t - window, t]
/// (the first window when t < window).
CapacityEstimate estimate_capacity(const NetworkTrace& trace, double t, const EstimatorParams& params,
                                   std::uint64_t seed);

/// Seeded AR(1) mobile-like trace standardized to the requested mean/std, floored at `floor`.
NetworkTrace generate_mobile_trace(std::string name, std::uint64_t seed, double duration = 300.0, double mean = 6.8,
                                   double std = 3.2, double ar = 0.97, double floor = 0.3);
/// Near-constant broadband trace with small multiplicative jitter.
NetworkTrace generate_broadband_trace(std::string name, std::uint64_t seed, double level, double jitter = 0.03,
                                      double duration = 300.0);

/// The ten bundled traces: 4 mobile, 3 broadband, 3 synthetic stress (step, fade, collapse).
std::vector<NetworkTrace> bundled_network_suite(std::uint64_t seed = 2024);

}  // namespace orbitstream
