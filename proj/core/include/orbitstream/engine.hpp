#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orbitstream/baselines.hpp"
#include "orbitstream/channel.hpp"
#include "orbitstream/controller.hpp"
#include "orbitstream/gaze_trace.hpp"
#include "orbitstream/gvp.hpp"
#include "orbitstream/qoe.hpp"
#include "orbitstream/scene.hpp"

namespace orbitstream {

struct VideoConfig {
    double segment = 2.0;   ///< s
    double duration = 100.0;  ///< s, a multiple of segment
    double b_max = 10.0;    ///< s
    double fov = deg_to_rad(80.0);
    int fps = 30;
    TileGrid grid;
    QualityLadder ladder;

    void validate() const;
    [[nodiscard]] int chunks() const;
};

struct BufferState {
    double level = 0.0;  ///< s of video
    double b_max = 10.0;
    double total_stall = 0.0;
    std::size_t stall_events = 0;

    friend bool operator==(const BufferState&, const BufferState&) = default;
};

struct BufferStep {
    BufferState buffer;
    double idle = 0.0;           ///< s spent waiting for room before the download
    double download_time = 0.0;  ///< s
    double stall = 0.0;          ///< s added by this chunk
    double t_download = 0.0;     ///< download start
    double t_end = 0.0;          ///< download end
};

/// Idles while the buffer cannot take another segment, downloads `chunk_mbits` over the trace
/// from the end of the idle period, drains playback meanwhile and appends one segment.
/// Requires chunk_mbits > 0.
BufferStep advance_buffer(const BufferState& buffer, double chunk_mbits, const NetworkTrace& trace, double t_start,
                          double segment);

/// Every tunable knob a policy may read.
struct PolicyParams {
    FieldParams field;
    ControllerParams controller;
    QoEParams qoe;
    EstimatorParams estimator;
    int estimator_chunks = 3;  ///< observed chunk throughputs feeding the capacity estimate
    bool use_gvp = true;       ///< false: uniform tile probabilities
    bool flat_mass = false;    ///< all semantic masses set to 1
    double dropout = 0.0;      ///< per-object detection miss probability
    MpcParams mpc;
    double reservoir = 2.0;
    double cushion = 6.0;
    int rate_window = 5;
    double bola_b_low = 2.0;  ///< buffer where BOLA first leaves tier 0; top tier at b_max - segment
    ExtrapolationParams extrapolation;
    double pano_uniform_mix = 0.3;

    void validate() const;
};

/// What a policy sees before choosing the next chunk.
struct PolicyContext {
    int chunk = 0;
    double t = 0.0;          ///< wall-clock decision time
    double content_t = 0.0;  ///< playback position of the chunk
    double buffer = 0.0;
    int last_tier = -1;
    std::vector<ThroughputSample> history;  ///< observed chunk throughputs
    double startup_capacity = 0.0;          ///< probe used before any chunk has been observed
    const SceneState* scene = nullptr;      ///< perceived scene at content_t
    SphericalCoord gaze;                    ///< latest head orientation
    std::vector<GazeSample> gaze_history;   ///< recent head orientations, oldest first
};

struct PolicyOutput {
    double rate = 0.0;   ///< aggregate rate R (Mbps)
    double c_hat = 0.0;  ///< capacity estimate, 0 when the policy keeps none
    std::vector<int> tile_tiers;
    TileSet predicted;   ///< tiles the policy expects to be viewed
    std::uint64_t singularities = 0;
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual PolicyOutput decide(const PolicyContext& ctx) = 0;
};

/// Policies: orbitstream, bola, buffer, rate, mpc, mpc-fast, mpc-robust, flare-approx, pano-approx.
const std::vector<std::string>& policy_names();
std::unique_ptr<Policy> make_policy(const std::string& policy, const PolicyParams& params, const VideoConfig& video,
                                    std::uint64_t seed);

/// A scene plus the head motion watching it.
struct SceneSource {
    std::string name;
    std::optional<SceneScript> script;  ///< sampled per run when set
    std::vector<SceneState> states;     ///< fixed detections otherwise
    std::optional<GazeTrace> gaze;      ///< synthesized from the scene when absent
    OperatorSpec op;                    ///< used when synthesizing gaze for fixed detections
};

struct RunConfig {
    std::string algorithm;  ///< reported name
    std::string policy;
    VideoConfig video;
    PolicyParams params;
    ScalingParams scaling;
    std::shared_ptr<const NetworkTrace> network;
    std::shared_ptr<const SceneSource> scene;
    std::uint64_t seed = 0;  ///< base seed of the experiment
    std::size_t run_index = 0;
    std::optional<double> initial_buffer;  ///< drawn from U[2, 6] s when absent
    double warmup = 20.0;                  ///< s excluded from buffer statistics
    double gaze_dt = 0.1;                  ///< ground-truth gaze sampling
};

struct ChunkRecord {
    int index = 0;
    double t_start = 0.0;
    double idle = 0.0;
    double buffer_start = 0.0;  ///< at the download start
    double download_time = 0.0;
    double stall = 0.0;
    double buffer_end = 0.0;
    int tier = 0;  ///< dominant tier
    double rate = 0.0;
    double c_hat = 0.0;
    double chunk_mbits = 0.0;
    std::vector<int> tile_tiers;
    TileSet predicted;
    TileSet truth;
    double iou = 0.0;
    QoEBreakdown qoe;
    double eqv_mbps = 0.0;
    std::uint64_t singularities = 0;
    double latency_ms = 0.0;  ///< wall clock, not deterministic

    /// Equality on everything except latency.
    [[nodiscard]] bool same_outcome(const ChunkRecord& o) const;
};

struct RunResult {
    std::string algorithm;
    std::string policy;
    std::size_t run_index = 0;
    std::string trace;
    std::string scene;
    double scale = 1.0;
    double initial_buffer = 0.0;
    std::vector<ChunkRecord> records;
    BufferState final_buffer;
    RunStats stats;

    [[nodiscard]] bool same_outcome(const RunResult& o) const;
};

/// Most frequent tier across tiles; ties go to the higher tier.
int dominant_tier(const std::vector<int>& tile_tiers);

/// Run aggregates from chunk records. Buffer statistics use chunks starting at or after `warmup`
/// (all chunks when none do).
RunStats summarize_run(const std::vector<ChunkRecord>& records, double warmup);

/// Environment seeds depend only on (seed, run_index); policy noise also on the policy name.
std::uint64_t environment_seed(std::uint64_t seed, std::size_t run_index);

RunResult simulate_run(const RunConfig& config);

struct McOptions {
    std::size_t runs = 1;
    unsigned workers = 1;
    std::function<void(std::size_t done, std::size_t total)> progress;
};

struct McResult {
    std::vector<RunResult> runs;  ///< algorithm-major, then run index
    McSummary summary;
};

/// Builds the config of run i from `bases[a]`: trace i mod |traces|, scene i mod |scenes|.
RunConfig monte_carlo_config(const RunConfig& base, std::size_t run_index,
                             const std::vector<std::shared_ptr<const NetworkTrace>>& traces,
                             const std::vector<std::shared_ptr<const SceneSource>>& scenes);

/// Executes |bases| x runs simulations over a worker pool. Failed runs carry the failure reason.
McResult run_monte_carlo(const std::vector<RunConfig>& bases,
                         const std::vector<std::shared_ptr<const NetworkTrace>>& traces,
                         const std::vector<std::shared_ptr<const SceneSource>>& scenes, const McOptions& options);

}  // namespace orbitstream
