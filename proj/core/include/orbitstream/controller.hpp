#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "orbitstream/gvp.hpp"

namespace orbitstream {

struct ControllerParams {
    double b_ref = 4.0;  ///< target buffer (s)
    double kp = 0.5;
    double kd = 0.2;
    double rho = 0.9;    ///< safety margin on the estimated capacity
    double alpha = 1.2;  ///< concentration exponent for tile allocation

    void validate() const;
};

/// Buffer error memory; the derivative term is zero until one decision has been made.
struct ControllerState {
    double e_prev = 0.0;
    bool initialized = false;
};

/// Global bitrate tiers and their per-tile split.
class QualityLadder {
public:
    /// The default six tiers in Mbps.
    static const std::vector<double>& default_tiers();

    QualityLadder() : QualityLadder(default_tiers(), 32) {}
    /// Uniform split across `tiles` tiles. Tiers must be strictly increasing and positive.
    QualityLadder(std::vector<double> global_tiers, int tiles);
    /// Per-tile split weighted by solid angle.
    static QualityLadder solid_angle_weighted(std::vector<double> global_tiers, const TileGrid& grid);

    [[nodiscard]] int levels() const { return static_cast<int>(tiers_.size()); }
    [[nodiscard]] int top() const { return levels() - 1; }
    [[nodiscard]] int tiles() const { return static_cast<int>(weights_.size()); }
    [[nodiscard]] double tier(int q) const { return tiers_[static_cast<std::size_t>(q)]; }
    [[nodiscard]] const std::vector<double>& tiers() const { return tiers_; }
    [[nodiscard]] double per_tile(int q, int k) const {
        return tiers_[static_cast<std::size_t>(q)] * weights_[static_cast<std::size_t>(k)];
    }
    /// Largest tier whose global rate does not exceed `rate`, or 0 when none does.
    [[nodiscard]] int floor_tier(double rate) const;

private:
    QualityLadder(std::vector<double> global_tiers, std::vector<double> weights);

    std::vector<double> tiers_;
    std::vector<double> weights_;
};

struct RateDecision {
    double u = 0.0;       ///< control signal
    double r_star = 0.0;  ///< preliminary target rate (Mbps)
    double r = 0.0;       ///< saturated aggregate rate (Mbps)
    std::vector<int> tile_quality;
    std::vector<double> tile_rate;
    std::vector<double> tile_budget;  ///< pre-quantization budget R_k
};

/// u = kp e + kd (e - e_prev)/dt with e = buffer - b_ref.
std::pair<double, ControllerState> pd_signal(double buffer, const ControllerState& state,
                                             const ControllerParams& params, double dt);

/// 1 + tanh(u), kept strictly inside (0, 2) for every finite u.
double saturation_factor(double u);

/// r_star = c_hat (1 + tanh u) rho, r = min(r_star, c_hat). Throws std::invalid_argument for c_hat <= 0.
std::pair<double, double> target_rate(double u, double c_hat, const ControllerParams& params);

/// Splits `r` across tiles in proportion to P^alpha and snaps each budget down the ladder;
/// every tile keeps at least tier 0. Fills the tile fields of the returned decision.
RateDecision allocate_tiles(double r, const ProbabilityMap& probs, const QualityLadder& ladder,
                            const ControllerParams& params);

/// Closed-loop buffer trajectory for a given proportional gain (kd = 0): samples every `sample_dt` seconds.
using GainPlant = std::function<std::vector<double>(double kp)>;

struct GainSweep {
    double kp_min = 0.05;
    double kp_max = 5.0;
    double kp_step = 0.05;
    double sample_dt = 2.0;    ///< spacing of the plant samples (s)
    double window_s = 30.0;    ///< oscillation comparison window
    double tolerance = 0.10;   ///< relative amplitude change still counted as sustained
    double min_amplitude = 1e-3;
};

struct TunedGains {
    double kp = 0.0;
    double kd = 0.0;
    double k_cr = 0.0;
    double t_cr = 0.0;
};

/// kp = 0.6 K_cr, kd = kp T_cr / 8.
TunedGains gains_from_critical(double k_cr, double t_cr);

/// Sustained oscillation test: peak-to-peak over the last window within `tolerance` of the preceding
/// window. Returns the oscillation period (s) or 0 when not sustained.
double sustained_oscillation_period(std::span<const double> series, const GainSweep& sweep);

/// Modified Ziegler-Nichols search for the critical gain. Throws TuningError when nothing oscillates.
TunedGains tune_gains(const GainPlant& plant, const GainSweep& sweep = {});

}  // namespace orbitstream
