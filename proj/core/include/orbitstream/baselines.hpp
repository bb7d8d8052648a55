#pragma once

#include <optional>
#include <span>
#include <vector>

#include "orbitstream/controller.hpp"
#include "orbitstream/gaze_trace.hpp"
#include "orbitstream/gvp.hpp"
#include "orbitstream/qoe.hpp"

namespace orbitstream {

struct ThroughputSample {
    int chunk = 0;
    double mbps = 0.0;
};

struct AbrObservation {
    double buffer = 0.0;                          ///< s
    int last_tier = -1;                           ///< -1 before the first chunk
    std::vector<ThroughputSample> throughput_history;  ///< oldest first
    int chunk_index = 0;
};

struct AbrDecision {
    int tier = 0;
    std::optional<ProbabilityMap> probs;
};

/// Linear reservoir/cushion map snapped down the ladder.
AbrDecision buffer_based_decide(const AbrObservation& obs, const QualityLadder& ladder, double reservoir = 2.0,
                                double cushion = 6.0);

/// Largest tier not above the harmonic mean of the last `window` throughputs.
AbrDecision rate_based_decide(const AbrObservation& obs, const QualityLadder& ladder, int window = 5);

struct BolaParams {
    double v = 0.0;        ///< control parameter (s per unit utility)
    double gamma_p = 0.0;  ///< utility offset
};

/// Threshold construction: tier 0 -> 1 switch at `b_low`, top tier reached at `b_high`.
BolaParams derive_bola_params(const QualityLadder& ladder, double b_low, double b_high);

/// argmax_q (V (u_q + gamma_p) - buffer) / r_q with u_q = ln(r_q / r_0); ties go to the higher tier.
AbrDecision bola_decide(const AbrObservation& obs, const QualityLadder& ladder, const BolaParams& params);

struct MpcParams {
    enum class Variant { fast, robust, last };
    int horizon = 5;
    Variant variant = Variant::fast;
    int window = 5;
    double segment = 2.0;
    QoEParams qoe;

    void validate() const;
};

/// Throughput the MPC plans with: harmonic mean (fast), harmonic mean discounted by the worst
/// recent relative error (robust), or the last sample (last). Zero without history.
double mpc_predicted_throughput(const AbrObservation& obs, const MpcParams& params);

/// Exhaustive horizon search maximizing utility minus stall and smoothness penalties.
/// Ties keep the lower first tier. Returns tier 0 without throughput history.
AbrDecision mpc_decide(const AbrObservation& obs, const MpcParams& params, const QualityLadder& ladder);

struct ExtrapolationParams {
    double fit_window = 1.0;   ///< s of history used by the fit
    double uniform_mix = 0.0;  ///< weight of a uniform map blended into the viewport indicator
};

struct ExtrapolatedViewport {
    SphericalCoord center;
    ProbabilityMap probs;
};

/// Least-squares linear fit on unwrapped yaw/pitch, evaluated `lookahead` seconds past the last sample.
ExtrapolatedViewport extrapolate_viewport(std::span<const GazeSample> history, double lookahead, const TileGrid& grid,
                                          double fov, const ExtrapolationParams& params = {});

}  // namespace orbitstream
