#include "orbitstream/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "orbitstream/errors.hpp"

namespace orbitstream {

void ControllerParams::validate() const {
    if (!(b_ref > 0.0)) throw std::invalid_argument("controller: b_ref must be positive");
    if (!(kp >= 0.0) || !(kd >= 0.0)) throw std::invalid_argument("controller: gains must be non-negative");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("controller: rho must lie in (0, 1]");
    if (!(alpha > 0.0)) throw std::invalid_argument("controller: alpha must be positive");
}

const std::vector<double>& QualityLadder::default_tiers() {
    static const std::vector<double> tiers{1.2, 2.5, 5.0, 10.0, 20.0, 40.1};
    return tiers;
}

QualityLadder::QualityLadder(std::vector<double> global_tiers, std::vector<double> weights)
    : tiers_(std::move(global_tiers)), weights_(std::move(weights)) {
    if (tiers_.empty()) throw std::invalid_argument("ladder needs at least one tier");
    if (!(tiers_.front() > 0.0)) throw std::invalid_argument("ladder tiers must be positive");
    for (std::size_t i = 1; i < tiers_.size(); ++i) {
        if (!(tiers_[i] > tiers_[i - 1])) throw std::invalid_argument("ladder tiers must be strictly increasing");
    }
    if (weights_.empty()) throw std::invalid_argument("ladder needs at least one tile");
}

QualityLadder::QualityLadder(std::vector<double> global_tiers, int tiles)
    : QualityLadder(std::move(global_tiers),
                    std::vector<double>(static_cast<std::size_t>(std::max(tiles, 0)), 1.0 / std::max(tiles, 1))) {}

QualityLadder QualityLadder::solid_angle_weighted(std::vector<double> global_tiers, const TileGrid& grid) {
    std::vector<double> w(static_cast<std::size_t>(grid.size()));
    for (int k = 0; k < grid.size(); ++k) w[static_cast<std::size_t>(k)] = grid.solid_angle(k) / (4.0 * kPi);
    return QualityLadder(std::move(global_tiers), std::move(w));
}

int QualityLadder::floor_tier(double rate) const {
    // Rates that equal a tier up to rounding (e.g. a harmonic mean of equal samples) select it.
    const double tolerant = rate * (1.0 + 1e-12);
    int q = 0;
    for (int i = 0; i < levels(); ++i) {
        if (tiers_[static_cast<std::size_t>(i)] <= tolerant) q = i;
    }
    return q;
}

std::pair<double, ControllerState> pd_signal(double buffer, const ControllerState& state,
                                             const ControllerParams& params, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("pd_signal: dt must be positive");
    const double e = buffer - params.b_ref;
    const double de = state.initialized ? (e - state.e_prev) / dt : 0.0;
    return {params.kp * e + params.kd * de, ControllerState{e, true}};
}

double saturation_factor(double u) {
    // 1 + tanh(u) = 2 / (1 + exp(-2u)); this form keeps precision for very negative u.
    const double f = 2.0 / (1.0 + std::exp(-2.0 * u));
    return std::clamp(f, std::numeric_limits<double>::min(), std::nextafter(2.0, 0.0));
}

std::pair<double, double> target_rate(double u, double c_hat, const ControllerParams& params) {
    if (!(c_hat > 0.0)) throw std::invalid_argument("target_rate: capacity estimate must be positive");
    const double r_star = c_hat * saturation_factor(u) * params.rho;
    return {r_star, std::min(r_star, c_hat)};
}

RateDecision allocate_tiles(double r, const ProbabilityMap& probs, const QualityLadder& ladder,
                            const ControllerParams& params) {
    const auto n = probs.size();
    if (n != static_cast<std::size_t>(ladder.tiles())) {
        throw std::invalid_argument(fmt::format("allocate_tiles: {} probabilities for {} tiles", n, ladder.tiles()));
    }
    RateDecision d;
    d.r = r;
    d.tile_budget.resize(n);
    d.tile_quality.assign(n, 0);
    d.tile_rate.resize(n);

    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        d.tile_budget[k] = std::pow(probs[k], params.alpha);
        norm += d.tile_budget[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
        d.tile_budget[k] = norm > 0.0 ? r * d.tile_budget[k] / norm : r / static_cast<double>(n);
        const int kk = static_cast<int>(k);
        // Relative slack so a budget equal to a tier rate is not lost to rounding.
        const double budget = d.tile_budget[k] * (1.0 + 1e-12);
        int q = 0;
        for (int t = 0; t < ladder.levels(); ++t) {
            if (ladder.per_tile(t, kk) <= budget) q = t;
        }
        d.tile_quality[k] = q;
        d.tile_rate[k] = ladder.per_tile(q, kk);
    }
    return d;
}

TunedGains gains_from_critical(double k_cr, double t_cr) {
    const double kp = 0.6 * k_cr;
    return {kp, kp * t_cr / 8.0, k_cr, t_cr};
}

namespace {

struct WindowStats {
    double p2p = 0.0;
    int crossings = 0;
    double first_cross = 0.0;
    double last_cross = 0.0;
};

WindowStats window_stats(std::span<const double> w, double dt) {
    WindowStats s;
    if (w.empty()) return s;
    const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
    s.p2p = *hi - *lo;
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double a = w[i - 1] - mean;
        const double b = w[i] - mean;
        if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) {
            // Linear interpolation of the crossing instant.
            const double tc = dt * (static_cast<double>(i - 1) + a / (a - b));
            if (s.crossings == 0) s.first_cross = tc;
            s.last_cross = tc;
            ++s.crossings;
        }
    }
    return s;
}

}  // namespace

double sustained_oscillation_period(std::span<const double> series, const GainSweep& sweep) {
    const auto per_window = static_cast<std::size_t>(std::llround(sweep.window_s / sweep.sample_dt));
    if (per_window < 2 || series.size() < 2 * per_window) return 0.0;
    const auto last = series.subspan(series.size() - per_window);
    const auto prev = series.subspan(series.size() - 2 * per_window, per_window);
    const auto s_last = window_stats(last, sweep.sample_dt);
    const auto s_prev = window_stats(prev, sweep.sample_dt);
    if (s_last.p2p < sweep.min_amplitude || s_prev.p2p < sweep.min_amplitude) return 0.0;
    if (s_last.crossings < 2 || s_prev.crossings < 2) return 0.0;
    if (std::abs(s_last.p2p - s_prev.p2p) > sweep.tolerance * s_prev.p2p) return 0.0;
    // Two mean crossings per period.
    return 2.0 * (s_last.last_cross - s_last.first_cross) / static_cast<double>(s_last.crossings - 1);
}

TunedGains tune_gains(const GainPlant& plant, const GainSweep& sweep) {
    if (!(sweep.kp_step > 0.0) || !(sweep.kp_max >= sweep.kp_min)) throw std::invalid_argument("tune_gains: bad sweep");
    const auto steps = static_cast<int>(std::floor((sweep.kp_max - sweep.kp_min) / sweep.kp_step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const double kp = sweep.kp_min + sweep.kp_step * i;
        const auto series = plant(kp);
        const double period = sustained_oscillation_period(series, sweep);
        if (period > 0.0) return gains_from_critical(kp, period);
    }
    throw TuningError(fmt::format("no sustained oscillation for kp in [{}, {}]", sweep.kp_min, sweep.kp_max));
}

}  // namespace orbitstream
