#include "orbitstream/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace orbitstream {

void VideoConfig::validate() const {
    if (!(segment > 0.0)) throw std::invalid_argument("video: segment must be positive");
    if (!(duration >= 0.0)) throw std::invalid_argument("video: duration must be non-negative");
    const double ratio = duration / segment;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
        throw std::invalid_argument(fmt::format("video: duration {} is not a multiple of segment {}", duration, segment));
    }
    if (!(b_max >= segment)) throw std::invalid_argument("video: b_max must hold at least one segment");
    if (!(fov > 0.0 && fov <= kTwoPi)) throw std::invalid_argument("video: fov must lie in (0, 2pi]");
    if (ladder.tiles() != grid.size()) {
        throw std::invalid_argument(
            fmt::format("video: ladder splits over {} tiles but the grid has {}", ladder.tiles(), grid.size()));
    }
}

int VideoConfig::chunks() const { return static_cast<int>(std::lround(duration / segment)); }

BufferStep advance_buffer(const BufferState& buffer, double chunk_mbits, const NetworkTrace& trace, double t_start,
                          double segment) {
    if (!(chunk_mbits > 0.0)) throw std::invalid_argument("advance_buffer: chunk size must be positive");
    BufferStep s;
    s.buffer = buffer;
    s.idle = std::max(0.0, buffer.level + segment - buffer.b_max);
    s.buffer.level -= s.idle;
    s.t_download = t_start + s.idle;
    s.download_time = trace.download_time(s.t_download, chunk_mbits);
    if (s.buffer.level >= s.download_time) {
        s.buffer.level -= s.download_time;
    } else {
        s.stall = s.download_time - s.buffer.level;
        s.buffer.level = 0.0;
        s.buffer.total_stall += s.stall;
        ++s.buffer.stall_events;
    }
    s.buffer.level = std::min(s.buffer.level + segment, s.buffer.b_max);
    s.t_end = s.t_download + s.download_time;
    return s;
}

void PolicyParams::validate() const {
    field.validate();
    controller.validate();
    qoe.validate();
    mpc.validate();
    if (estimator_chunks < 1) throw std::invalid_argument("params: estimator_chunks must be >= 1");
    if (!(dropout >= 0.0 && dropout <= 1.0)) throw std::invalid_argument("params: dropout must lie in [0, 1]");
    if (!(reservoir >= 0.0 && cushion > 0.0)) throw std::invalid_argument("params: bad reservoir/cushion");
    if (rate_window < 1) throw std::invalid_argument("params: rate_window must be >= 1");
    if (!(pano_uniform_mix >= 0.0 && pano_uniform_mix <= 1.0)) {
        throw std::invalid_argument("params: pano_uniform_mix must lie in [0, 1]");
    }
}

namespace {

AbrObservation observation(const PolicyContext& ctx) {
    return {ctx.buffer, ctx.last_tier, ctx.history, ctx.chunk};
}

PolicyOutput scalar_output(int tier, const PolicyContext& ctx, const VideoConfig& video) {
    PolicyOutput out;
    out.rate = video.ladder.tier(tier);
    out.tile_tiers.assign(static_cast<std::size_t>(video.grid.size()), tier);
    out.predicted = viewport_tiles(ctx.gaze, video.fov, video.grid);
    return out;
}

class OrbitStreamPolicy final : public Policy {
public:
    OrbitStreamPolicy(const PolicyParams& params, const VideoConfig& video, std::uint64_t seed)
        : params_(params),
          video_(video),
          estimator_rng_(derive_seed(seed, "estimator")),
          gvp_rng_(derive_seed(seed, "gvp")) {}

    PolicyOutput decide(const PolicyContext& ctx) override {
        std::vector<double> observed;
        const auto n = ctx.history.size();
        const auto take = std::min(n, static_cast<std::size_t>(params_.estimator_chunks));
        for (std::size_t i = n - take; i < n; ++i) observed.push_back(ctx.history[i].mbps);
        if (observed.empty()) observed.push_back(ctx.startup_capacity);
        const auto estimate = estimate_from_throughputs(observed, params_.estimator, estimator_rng_);

        const auto [u, next] = pd_signal(ctx.buffer, controller_, params_.controller, video_.segment);
        controller_ = next;
        const auto rates = target_rate(u, estimate.c_hat, params_.controller);

        PolicyOutput out;
        ProbabilityMap probs;
        if (params_.use_gvp) {
            // Re-anchor on the latest head orientation, keeping the tangent part of the velocity.
            const UnitVec3 g = to_unit(ctx.gaze);
            const GazeState start{g, project_tangent(gaze_.v, g.vec())};
            const SceneState empty;
            const SceneState& scene = ctx.scene != nullptr ? *ctx.scene : empty;
            FieldDiagnostics diag;
            auto pred = predict_viewport(start, std::span<const SceneState>(&scene, 1), params_.field, video_.grid,
                                         video_.fov, gvp_rng_, &diag);
            gaze_ = pred.state;
            probs = std::move(pred.probs);
            out.predicted = std::move(pred.tiles);
            out.singularities = diag.singularities;
        } else {
            probs = ProbabilityMap::uniform(static_cast<std::size_t>(video_.grid.size()));
            out.predicted = viewport_tiles(ctx.gaze, video_.fov, video_.grid);
        }
        auto decision = allocate_tiles(rates.second, probs, video_.ladder, params_.controller);
        out.rate = rates.second;
        out.c_hat = estimate.c_hat;
        out.tile_tiers = std::move(decision.tile_quality);
        return out;
    }

private:
    PolicyParams params_;
    VideoConfig video_;
    Rng estimator_rng_;
    Rng gvp_rng_;
    GazeState gaze_;
    ControllerState controller_;
};

class BufferPolicy final : public Policy {
public:
    BufferPolicy(const PolicyParams& params, const VideoConfig& video) : params_(params), video_(video) {}
    PolicyOutput decide(const PolicyContext& ctx) override {
        const auto d = buffer_based_decide(observation(ctx), video_.ladder, params_.reservoir, params_.cushion);
        return scalar_output(d.tier, ctx, video_);
    }

private:
    PolicyParams params_;
    VideoConfig video_;
};

class RatePolicy final : public Policy {
public:
    RatePolicy(const PolicyParams& params, const VideoConfig& video) : params_(params), video_(video) {}
    PolicyOutput decide(const PolicyContext& ctx) override {
        const auto d = rate_based_decide(observation(ctx), video_.ladder, params_.rate_window);
        return scalar_output(d.tier, ctx, video_);
    }

private:
    PolicyParams params_;
    VideoConfig video_;
};

class BolaPolicy final : public Policy {
public:
    BolaPolicy(const PolicyParams& params, const VideoConfig& video)
        : video_(video), bola_(derive_bola_params(video.ladder, params.bola_b_low, video.b_max - video.segment)) {}
    PolicyOutput decide(const PolicyContext& ctx) override {
        const auto d = bola_decide(observation(ctx), video_.ladder, bola_);
        return scalar_output(d.tier, ctx, video_);
    }

private:
    VideoConfig video_;
    BolaParams bola_;
};

class MpcPolicy final : public Policy {
public:
    MpcPolicy(const PolicyParams& params, const VideoConfig& video, MpcParams::Variant variant)
        : video_(video), mpc_(params.mpc) {
        mpc_.variant = variant;
        mpc_.segment = video.segment;
        mpc_.qoe = params.qoe;
    }
    PolicyOutput decide(const PolicyContext& ctx) override {
        const auto d = mpc_decide(observation(ctx), mpc_, video_.ladder);
        return scalar_output(d.tier, ctx, video_);
    }

private:
    VideoConfig video_;
    MpcParams mpc_;
};

class ExtrapolationPolicy final : public Policy {
public:
    ExtrapolationPolicy(const PolicyParams& params, const VideoConfig& video, double uniform_mix)
        : params_(params), video_(video) {
        params_.extrapolation.uniform_mix = uniform_mix;
    }
    PolicyOutput decide(const PolicyContext& ctx) override {
        const auto view = extrapolate_viewport(ctx.gaze_history, video_.segment, video_.grid, video_.fov,
                                               params_.extrapolation);
        const auto d = rate_based_decide(observation(ctx), video_.ladder, params_.rate_window);
        PolicyOutput out;
        out.rate = video_.ladder.tier(d.tier);
        out.tile_tiers = allocate_tiles(out.rate, view.probs, video_.ladder, params_.controller).tile_quality;
        out.predicted = viewport_tiles(view.center, video_.fov, video_.grid);
        return out;
    }

private:
    PolicyParams params_;
    VideoConfig video_;
};

}  // namespace

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names{"orbitstream", "bola",       "buffer",       "rate",       "mpc",
                                                "mpc-fast",    "mpc-robust", "flare-approx", "pano-approx"};
    return names;
}

std::unique_ptr<Policy> make_policy(const std::string& policy, const PolicyParams& params, const VideoConfig& video,
                                    std::uint64_t seed) {
    if (policy == "orbitstream") return std::make_unique<OrbitStreamPolicy>(params, video, seed);
    if (policy == "bola") return std::make_unique<BolaPolicy>(params, video);
    if (policy == "buffer") return std::make_unique<BufferPolicy>(params, video);
    if (policy == "rate") return std::make_unique<RatePolicy>(params, video);
    if (policy == "mpc") return std::make_unique<MpcPolicy>(params, video, MpcParams::Variant::last);
    if (policy == "mpc-fast") return std::make_unique<MpcPolicy>(params, video, MpcParams::Variant::fast);
    if (policy == "mpc-robust") return std::make_unique<MpcPolicy>(params, video, MpcParams::Variant::robust);
    if (policy == "flare-approx") return std::make_unique<ExtrapolationPolicy>(params, video, 0.0);
    if (policy == "pano-approx") return std::make_unique<ExtrapolationPolicy>(params, video, params.pano_uniform_mix);
    throw std::invalid_argument(fmt::format("unknown policy '{}'", policy));
}

bool ChunkRecord::same_outcome(const ChunkRecord& o) const {
    return index == o.index && t_start == o.t_start && idle == o.idle && buffer_start == o.buffer_start &&
           download_time == o.download_time && stall == o.stall && buffer_end == o.buffer_end && tier == o.tier &&
           rate == o.rate && c_hat == o.c_hat && chunk_mbits == o.chunk_mbits && tile_tiers == o.tile_tiers &&
           predicted == o.predicted && truth == o.truth && iou == o.iou && qoe == o.qoe && eqv_mbps == o.eqv_mbps &&
           singularities == o.singularities;
}

bool RunResult::same_outcome(const RunResult& o) const {
    if (algorithm != o.algorithm || policy != o.policy || run_index != o.run_index || trace != o.trace ||
        scene != o.scene || scale != o.scale || initial_buffer != o.initial_buffer ||
        !(final_buffer == o.final_buffer) || records.size() != o.records.size() ||
        stats.failed != o.stats.failed || stats.failure != o.stats.failure) {
        return false;
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!records[i].same_outcome(o.records[i])) return false;
    }
    return true;
}

int dominant_tier(const std::vector<int>& tile_tiers) {
    std::map<int, int> counts;
    for (int q : tile_tiers) ++counts[q];
    int best = 0;
    int best_count = -1;
    for (const auto& [q, c] : counts) {
        if (c >= best_count) {
            best = q;
            best_count = c;
        }
    }
    return best;
}

RunStats summarize_run(const std::vector<ChunkRecord>& records, double warmup) {
    RunStats s;
    s.chunks = records.size();
    if (records.empty()) return s;
    std::vector<double> buffers;
    std::vector<double> latencies;
    std::vector<double> eqv;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        s.qoe_terms_mean += r.qoe;
        if (r.t_start >= warmup) buffers.push_back(r.buffer_end);
        latencies.push_back(r.latency_ms);
        eqv.push_back(r.eqv_mbps);
        if (r.stall > 0.0) ++s.stall_events;
        s.stall_s += r.stall;
        if (i > 0 && r.tier != records[i - 1].tier) ++s.switches;
        if (r.iou >= kHitIoU) ++hits;
        s.singularities += r.singularities;
    }
    if (buffers.empty()) {
        for (const auto& r : records) buffers.push_back(r.buffer_end);
    }
    const auto n = static_cast<double>(records.size());
    s.qoe_total = s.qoe_terms_mean.total;
    s.qoe_mean = s.qoe_total / n;
    s.qoe_terms_mean.utility /= n;
    s.qoe_terms_mean.stall /= n;
    s.qoe_terms_mean.smoothness /= n;
    s.qoe_terms_mean.viewport /= n;
    s.qoe_terms_mean.total /= n;
    s.buffer_mean = mean_of(buffers);
    s.buffer_std = population_std(buffers);
    s.buffer_min = *std::min_element(buffers.begin(), buffers.end());
    s.eqv_bitrate = mean_of(eqv);
    s.decision_ms = mean_of(latencies);
    s.hit_ratio = 100.0 * static_cast<double>(hits) / n;
    return s;
}

std::uint64_t environment_seed(std::uint64_t seed, std::size_t run_index) {
    return derive_seed(seed, "environment", run_index);
}

namespace {

TileSet nonempty_viewport(const SphericalCoord& at, const VideoConfig& video) {
    auto tiles = viewport_tiles(at, video.fov, video.grid);
    if (tiles.empty()) tiles.push_back(video.grid.tile_of(at));
    return tiles;
}

}  // namespace

RunResult simulate_run(const RunConfig& config) {
    const auto& video = config.video;
    video.validate();
    config.params.validate();
    if (!config.network) throw std::invalid_argument("simulate_run: no network trace");
    if (!config.scene) throw std::invalid_argument("simulate_run: no scene");

    RunResult result;
    result.algorithm = config.algorithm;
    result.policy = config.policy;
    result.run_index = config.run_index;
    result.trace = config.network->name();
    result.scene = config.scene->name;

    const auto env = environment_seed(config.seed, config.run_index);
    result.scale = draw_run_scale(config.scaling, derive_seed(env, "scale"));
    const auto trace = config.network->scaled(config.scaling.global_scale * result.scale);

    if (config.initial_buffer) {
        result.initial_buffer = *config.initial_buffer;
    } else {
        Rng rng(derive_seed(env, "initial-buffer"));
        result.initial_buffer = std::uniform_real_distribution<double>(2.0, 6.0)(rng);
    }
    if (!(result.initial_buffer >= 0.0 && result.initial_buffer <= video.b_max)) {
        throw std::invalid_argument("simulate_run: initial buffer outside [0, b_max]");
    }

    const auto& source = *config.scene;
    std::vector<SceneState> states =
        source.script ? generate_scene_script(*source.script, derive_seed(env, "scene")) : source.states;
    const SceneTimeline truth_scene(states);
    const GazeTrace gaze =
        source.gaze ? *source.gaze
                    : synthesize_operator_gaze(truth_scene, source.script ? source.script->op : source.op,
                                               video.duration + video.segment, config.gaze_dt,
                                               derive_seed(env, "gaze"));
    if (config.params.dropout > 0.0) states = apply_detection_dropout(states, config.params.dropout, derive_seed(env, "dropout"));
    if (config.params.flat_mass) states = flatten_masses(std::move(states));
    const SceneTimeline perceived(std::move(states));

    auto policy = make_policy(config.policy, config.params, video, derive_seed(env, "policy:" + config.policy));

    BufferState buffer;
    buffer.level = result.initial_buffer;
    buffer.b_max = video.b_max;
    double t = 0.0;
    int last_tier = -1;
    double last_rate = 0.0;
    std::vector<ThroughputSample> history;
    const int q_max = video.ladder.top();
    const double fit_window = config.params.extrapolation.fit_window;

    for (int n = 0; n < video.chunks(); ++n) {
        const double content_t = n * video.segment;
        const SceneState scene = perceived.at(content_t);

        PolicyContext ctx;
        ctx.chunk = n;
        ctx.t = t + std::max(0.0, buffer.level + video.segment - buffer.b_max);
        ctx.content_t = content_t;
        ctx.buffer = buffer.level - (ctx.t - t);
        ctx.last_tier = last_tier;
        ctx.history = history;
        ctx.startup_capacity = trace.mean_capacity(ctx.t, ctx.t + video.segment);
        ctx.scene = &scene;
        ctx.gaze = gaze.at(content_t);
        ctx.gaze_history = gaze.window(content_t, fit_window);

        const auto t0 = std::chrono::steady_clock::now();
        auto out = policy->decide(ctx);
        const auto t1 = std::chrono::steady_clock::now();

        ChunkRecord rec;
        rec.index = n;
        rec.t_start = t;
        rec.latency_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        rec.rate = out.rate;
        rec.c_hat = out.c_hat;
        rec.chunk_mbits = out.rate * video.segment;
        rec.tile_tiers = std::move(out.tile_tiers);
        rec.tier = dominant_tier(rec.tile_tiers);
        rec.predicted = std::move(out.predicted);
        rec.singularities = out.singularities;

        const auto step = advance_buffer(buffer, rec.chunk_mbits, trace, t, video.segment);
        rec.idle = step.idle;
        rec.buffer_start = buffer.level - step.idle;
        rec.download_time = step.download_time;
        rec.stall = step.stall;
        rec.buffer_end = step.buffer.level;
        buffer = step.buffer;
        t = step.t_end;
        history.push_back({n, rec.chunk_mbits / rec.download_time});

        rec.truth = nonempty_viewport(gaze.at(content_t + video.segment), video);
        rec.iou = tile_set_iou(rec.predicted, rec.truth);
        std::vector<int> viewed;
        double eqv = 0.0;
        for (int k : rec.truth) {
            const int q = rec.tile_tiers[static_cast<std::size_t>(k)];
            viewed.push_back(q);
            eqv += video.ladder.tier(q);
        }
        rec.eqv_mbps = eqv / static_cast<double>(rec.truth.size());
        std::optional<double> switch_magnitude;
        if (!config.params.qoe.smoothness_on_rate) {
            switch_magnitude = last_tier < 0 ? 0.0 : std::abs(static_cast<double>(rec.tier - last_tier));
        }
        rec.qoe = qoe_chunk(rec.rate, last_tier < 0 ? rec.rate : last_rate, rec.stall, viewed, q_max,
                            config.params.qoe, switch_magnitude);
        last_tier = rec.tier;
        last_rate = rec.rate;
        result.records.push_back(std::move(rec));
    }
    result.final_buffer = buffer;
    result.stats = summarize_run(result.records, config.warmup);
    result.stats.algorithm = result.algorithm;
    result.stats.run_index = result.run_index;
    result.stats.trace = result.trace;
    result.stats.scene = result.scene;
    return result;
}

RunConfig monte_carlo_config(const RunConfig& base, std::size_t run_index,
                             const std::vector<std::shared_ptr<const NetworkTrace>>& traces,
                             const std::vector<std::shared_ptr<const SceneSource>>& scenes) {
    RunConfig c = base;
    c.run_index = run_index;
    if (!traces.empty()) c.network = traces[run_index % traces.size()];
    if (!scenes.empty()) c.scene = scenes[run_index % scenes.size()];
    return c;
}

McResult run_monte_carlo(const std::vector<RunConfig>& bases,
                         const std::vector<std::shared_ptr<const NetworkTrace>>& traces,
                         const std::vector<std::shared_ptr<const SceneSource>>& scenes, const McOptions& options) {
    if (options.runs < 1) throw std::invalid_argument("run_monte_carlo: need at least one run");
    const std::size_t total = bases.size() * options.runs;
    McResult mc;
    mc.runs.resize(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t j = next.fetch_add(1);
            if (j >= total) return;
            const auto& base = bases[j / options.runs];
            const auto cfg = monte_carlo_config(base, j % options.runs, traces, scenes);
            try {
                mc.runs[j] = simulate_run(cfg);
            } catch (const std::exception& e) {
                RunResult failed;
                failed.algorithm = cfg.algorithm;
                failed.policy = cfg.policy;
                failed.run_index = cfg.run_index;
                failed.trace = cfg.network ? cfg.network->name() : std::string{};
                failed.scene = cfg.scene ? cfg.scene->name : std::string{};
                failed.stats.algorithm = failed.algorithm;
                failed.stats.run_index = failed.run_index;
                failed.stats.trace = failed.trace;
                failed.stats.scene = failed.scene;
                failed.stats.failed = true;
                failed.stats.failure = e.what();
                mc.runs[j] = std::move(failed);
            }
            const auto d = done.fetch_add(1) + 1;
            if (options.progress) {
                std::lock_guard lock(progress_mutex);
                options.progress(d, total);
            }
        }
    };

    const auto workers = std::max<std::size_t>(1, std::min<std::size_t>(options.workers, total));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }

    std::vector<RunStats> stats;
    stats.reserve(total);
    for (const auto& r : mc.runs) stats.push_back(r.stats);
    mc.summary = aggregate_metrics(stats);
    return mc;
}

}  // namespace orbitstream
