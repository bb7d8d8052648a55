#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orbitstream/geometry.hpp"

namespace orbitstream {

struct QoEParams {
    double mu = 10.0;     ///< stall penalty per second
    double lambda = 0.5;  ///< smoothness penalty per unit of change
    double nu = 5.0;      ///< viewport-error penalty
    double r_min = 1.2;   ///< Mbps
    /// Smoothness on aggregate rate (Mbps) when true, on dominant tier index otherwise.
    bool smoothness_on_rate = true;

    void validate() const;
};

struct QoEBreakdown {
    double utility = 0.0;
    double stall = 0.0;
    double smoothness = 0.0;
    double viewport = 0.0;
    double total = 0.0;

    QoEBreakdown& operator+=(const QoEBreakdown& o) {
        utility += o.utility;
        stall += o.stall;
        smoothness += o.smoothness;
        viewport += o.viewport;
        total += o.total;
        return *this;
    }
    friend bool operator==(const QoEBreakdown&, const QoEBreakdown&) = default;
};

/// 1 - mean(q_k / q_max) over the viewport tiers. Throws std::invalid_argument when empty.
double viewport_error(std::span<const int> viewport_tiers, int q_max);

/// Per-chunk QoE terms. `switch_magnitude` replaces |r_t - r_prev| in the smoothness term when set.
QoEBreakdown qoe_chunk(double r_t, double r_prev, double stall_s, std::span<const int> viewport_tiers, int q_max,
                       const QoEParams& params, std::optional<double> switch_magnitude = std::nullopt);

inline constexpr double kHitIoU = 0.5;

/// Percentage of intervals whose IoU reaches 0.5. Throws std::invalid_argument on length mismatch.
double hit_ratio(std::span<const TileSet> predicted, std::span<const TileSet> truth);

/// Aggregates of one simulation run.
struct RunStats {
    std::string algorithm;
    std::size_t run_index = 0;
    std::string trace;
    std::string scene;
    std::size_t chunks = 0;
    double qoe_total = 0.0;
    double qoe_mean = 0.0;  ///< per chunk
    QoEBreakdown qoe_terms_mean;
    double buffer_mean = 0.0;
    double buffer_std = 0.0;
    double buffer_min = 0.0;
    std::size_t switches = 0;
    std::size_t stall_events = 0;
    double stall_s = 0.0;
    double eqv_bitrate = 0.0;
    double decision_ms = 0.0;
    double hit_ratio = 0.0;
    std::uint64_t singularities = 0;
    bool failed = false;
    std::string failure;
};

struct AlgorithmSummary {
    std::string algorithm;
    std::size_t runs = 0;
    std::size_t failures = 0;
    double qoe_mean = 0.0;
    double qoe_std = 0.0;
    double eqv_bitrate = 0.0;
    double buffer_mean = 0.0;
    double buffer_std = 0.0;
    double buffer_min = 0.0;
    double switches = 0.0;
    double stalls = 0.0;
    double stall_s = 0.0;
    double decision_ms = 0.0;
    double hit_ratio = 0.0;
    double viewport_penalty = 0.0;
    double singularities = 0.0;
    /// (qoe, cumulative probability) at 100 evenly spaced quantiles.
    std::vector<std::pair<double, double>> cdf;
};

struct McSummary {
    std::vector<AlgorithmSummary> algorithms;  ///< first-appearance order
    std::vector<RunStats> failures;
};

double mean_of(std::span<const double> xs);
/// Population standard deviation (divides by n).
double population_std(std::span<const double> xs);
/// Nearest-rank empirical CDF at p = 1/points .. 1.
std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values, std::size_t points = 100);

/// Per-algorithm mean and population std of per-run values; failed runs are excluded and listed.
McSummary aggregate_metrics(std::span<const RunStats> runs);

}  // namespace orbitstream
