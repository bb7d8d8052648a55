#include "orbitstream/qoe.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace orbitstream {

void QoEParams::validate() const {
    if (!(mu >= 0.0 && lambda >= 0.0 && nu >= 0.0)) throw std::invalid_argument("qoe: penalties must be non-negative");
    if (!(r_min > 0.0)) throw std::invalid_argument("qoe: r_min must be positive");
}

double viewport_error(std::span<const int> viewport_tiers, int q_max) {
    if (viewport_tiers.empty()) throw std::invalid_argument("viewport_error: empty viewport");
    if (q_max <= 0) return 0.0;
    double sum = 0.0;
    for (int q : viewport_tiers) sum += static_cast<double>(q) / static_cast<double>(q_max);
    return 1.0 - sum / static_cast<double>(viewport_tiers.size());
}

QoEBreakdown qoe_chunk(double r_t, double r_prev, double stall_s, std::span<const int> viewport_tiers, int q_max,
                       const QoEParams& params, std::optional<double> switch_magnitude) {
    QoEBreakdown b;
    b.utility = std::log(std::max(r_t, params.r_min) / params.r_min);
    b.stall = params.mu * stall_s;
    b.smoothness = params.lambda * switch_magnitude.value_or(std::abs(r_t - r_prev));
    b.viewport = params.nu * viewport_error(viewport_tiers, q_max);
    b.total = b.utility - b.stall - b.smoothness - b.viewport;
    return b;
}

double hit_ratio(std::span<const TileSet> predicted, std::span<const TileSet> truth) {
    if (predicted.size() != truth.size()) throw std::invalid_argument("hit_ratio: sequences differ in length");
    if (predicted.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (tile_set_iou(predicted[i], truth[i]) >= kHitIoU) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

std::vector<std::pair<double, double>> empirical_cdf(std::vector<double> values, std::size_t points) {
    std::vector<std::pair<double, double>> cdf;
    if (values.empty() || points == 0) return cdf;
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    cdf.reserve(points);
    for (std::size_t i = 1; i <= points; ++i) {
        const double p = static_cast<double>(i) / static_cast<double>(points);
        auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
        rank = std::clamp<std::size_t>(rank, 1, n);
        cdf.emplace_back(values[rank - 1], p);
    }
    return cdf;
}

McSummary aggregate_metrics(std::span<const RunStats> runs) {
    McSummary summary;
    std::vector<std::string> order;
    std::map<std::string, std::vector<const RunStats*>> groups;
    for (const auto& r : runs) {
        if (!groups.contains(r.algorithm)) order.push_back(r.algorithm);
        auto& g = groups[r.algorithm];
        if (r.failed) {
            summary.failures.push_back(r);
        } else {
            g.push_back(&r);
        }
    }
    for (const auto& name : order) {
        const auto& g = groups[name];
        AlgorithmSummary a;
        a.algorithm = name;
        a.runs = g.size();
        a.failures = static_cast<std::size_t>(
            std::count_if(runs.begin(), runs.end(), [&](const RunStats& r) { return r.failed && r.algorithm == name; }));
        auto collect = [&](auto field) {
            std::vector<double> v;
            v.reserve(g.size());
            for (const auto* r : g) v.push_back(static_cast<double>(field(*r)));
            return v;
        };
        const auto qoe = collect([](const RunStats& r) { return r.qoe_mean; });
        a.qoe_mean = mean_of(qoe);
        a.qoe_std = population_std(qoe);
        a.eqv_bitrate = mean_of(collect([](const RunStats& r) { return r.eqv_bitrate; }));
        a.buffer_mean = mean_of(collect([](const RunStats& r) { return r.buffer_mean; }));
        a.buffer_std = mean_of(collect([](const RunStats& r) { return r.buffer_std; }));
        a.buffer_min = mean_of(collect([](const RunStats& r) { return r.buffer_min; }));
        a.switches = mean_of(collect([](const RunStats& r) { return r.switches; }));
        a.stalls = mean_of(collect([](const RunStats& r) { return r.stall_events; }));
        a.stall_s = mean_of(collect([](const RunStats& r) { return r.stall_s; }));
        a.decision_ms = mean_of(collect([](const RunStats& r) { return r.decision_ms; }));
        a.hit_ratio = mean_of(collect([](const RunStats& r) { return r.hit_ratio; }));
        a.viewport_penalty = mean_of(collect([](const RunStats& r) { return r.qoe_terms_mean.viewport; }));
        a.singularities = mean_of(collect([](const RunStats& r) { return r.singularities; }));
        a.cdf = empirical_cdf(qoe);
        summary.algorithms.push_back(std::move(a));
    }
    return summary;
}

}  // namespace orbitstream
