#include "orbitstream/experiment.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "orbitstream/errors.hpp"
#include "orbitstream/scenarios.hpp"
#include "text_util.hpp"

namespace orbitstream {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    if (!obj.is_object()) throw ValidationError(fmt::format("config: '{}' must be an object", where));
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ValidationError(fmt::format("config: unknown key '{}' in '{}'", key, where));
        }
    }
}

double get_number(const json& obj, std::string_view key, double fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw ValidationError(fmt::format("config: '{}' must be a number", key));
    return it->get<double>();
}

int get_int(const json& obj, std::string_view key, int fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) throw ValidationError(fmt::format("config: '{}' must be an integer", key));
    return it->get<int>();
}

bool get_bool(const json& obj, std::string_view key, bool fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) throw ValidationError(fmt::format("config: '{}' must be a boolean", key));
    return it->get<bool>();
}

std::string get_string(const json& obj, std::string_view key, std::string fallback) {
    const auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_string()) throw ValidationError(fmt::format("config: '{}' must be a string", key));
    return it->get<std::string>();
}

void apply_overrides(PolicyParams& p, const json& o) {
    check_keys(o,
               {"field", "controller", "qoe", "estimator", "gvp", "mass_mode", "dropout", "mpc", "buffer", "rate",
                "bola", "extrapolation", "pano"},
               "params");
    if (o.contains("field")) {
        const auto& f = o["field"];
        check_keys(f, {"G", "delta", "beta", "gamma", "eta", "sigma", "dt", "steps_per_chunk", "allow_zero_delta",
                       "min_separation"},
                   "params.field");
        p.field.G = get_number(f, "G", p.field.G);
        p.field.delta = get_number(f, "delta", p.field.delta);
        p.field.beta = get_number(f, "beta", p.field.beta);
        p.field.gamma = get_number(f, "gamma", p.field.gamma);
        p.field.eta = get_number(f, "eta", p.field.eta);
        p.field.sigma = get_number(f, "sigma", p.field.sigma);
        p.field.dt = get_number(f, "dt", p.field.dt);
        p.field.steps_per_chunk = get_int(f, "steps_per_chunk", p.field.steps_per_chunk);
        p.field.allow_zero_delta = get_bool(f, "allow_zero_delta", p.field.allow_zero_delta);
        p.field.min_separation = get_number(f, "min_separation", p.field.min_separation);
    }
    if (o.contains("controller")) {
        const auto& c = o["controller"];
        check_keys(c, {"b_ref", "kp", "kd", "rho", "alpha"}, "params.controller");
        p.controller.b_ref = get_number(c, "b_ref", p.controller.b_ref);
        p.controller.kp = get_number(c, "kp", p.controller.kp);
        p.controller.kd = get_number(c, "kd", p.controller.kd);
        p.controller.rho = get_number(c, "rho", p.controller.rho);
        p.controller.alpha = get_number(c, "alpha", p.controller.alpha);
    }
    if (o.contains("qoe")) {
        const auto& q = o["qoe"];
        check_keys(q, {"mu", "lambda", "nu", "r_min", "smoothness"}, "params.qoe");
        p.qoe.mu = get_number(q, "mu", p.qoe.mu);
        p.qoe.lambda = get_number(q, "lambda", p.qoe.lambda);
        p.qoe.nu = get_number(q, "nu", p.qoe.nu);
        p.qoe.r_min = get_number(q, "r_min", p.qoe.r_min);
        const auto mode = get_string(q, "smoothness", p.qoe.smoothness_on_rate ? "rate" : "tier");
        if (mode != "rate" && mode != "tier") throw ValidationError("config: qoe.smoothness must be 'rate' or 'tier'");
        p.qoe.smoothness_on_rate = mode == "rate";
    }
    if (o.contains("estimator")) {
        const auto& e = o["estimator"];
        check_keys(e, {"window_s", "epsilon_mbps", "relative_cap", "chunks"}, "params.estimator");
        p.estimator.window = get_number(e, "window_s", p.estimator.window);
        p.estimator.epsilon_bound = get_number(e, "epsilon_mbps", p.estimator.epsilon_bound);
        p.estimator.relative_cap = get_number(e, "relative_cap", p.estimator.relative_cap);
        p.estimator_chunks = get_int(e, "chunks", p.estimator_chunks);
    }
    p.use_gvp = get_bool(o, "gvp", p.use_gvp);
    if (o.contains("mass_mode")) {
        const auto mode = get_string(o, "mass_mode", "semantic");
        if (mode != "semantic" && mode != "flat") throw ValidationError("config: mass_mode must be 'semantic' or 'flat'");
        p.flat_mass = mode == "flat";
    }
    p.dropout = get_number(o, "dropout", p.dropout);
    if (o.contains("mpc")) {
        const auto& m = o["mpc"];
        check_keys(m, {"horizon", "window"}, "params.mpc");
        p.mpc.horizon = get_int(m, "horizon", p.mpc.horizon);
        p.mpc.window = get_int(m, "window", p.mpc.window);
    }
    if (o.contains("buffer")) {
        const auto& b = o["buffer"];
        check_keys(b, {"reservoir_s", "cushion_s"}, "params.buffer");
        p.reservoir = get_number(b, "reservoir_s", p.reservoir);
        p.cushion = get_number(b, "cushion_s", p.cushion);
    }
    if (o.contains("rate")) {
        check_keys(o["rate"], {"window"}, "params.rate");
        p.rate_window = get_int(o["rate"], "window", p.rate_window);
    }
    if (o.contains("bola")) {
        check_keys(o["bola"], {"b_low_s"}, "params.bola");
        p.bola_b_low = get_number(o["bola"], "b_low_s", p.bola_b_low);
    }
    if (o.contains("extrapolation")) {
        check_keys(o["extrapolation"], {"fit_window_s"}, "params.extrapolation");
        p.extrapolation.fit_window = get_number(o["extrapolation"], "fit_window_s", p.extrapolation.fit_window);
    }
    if (o.contains("pano")) {
        check_keys(o["pano"], {"uniform_mix"}, "params.pano");
        p.pano_uniform_mix = get_number(o["pano"], "uniform_mix", p.pano_uniform_mix);
    }
}

json parse_json(std::string_view text, std::string_view what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: {}", what, e.what()));
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

}  // namespace

std::vector<AlgorithmEntry> default_algorithms(const PolicyParams& params) {
    std::vector<AlgorithmEntry> out;
    for (const auto& name : policy_names()) out.push_back({name, name, params});
    auto uniform = params;
    uniform.use_gvp = false;
    out.push_back({"orbitstream-uniform", "orbitstream", uniform});
    auto flat = params;
    flat.flat_mass = true;
    out.push_back({"orbitstream-flat", "orbitstream", flat});
    auto sharp = params;
    sharp.field.beta = 1.5;
    out.push_back({"orbitstream-beta1.5", "orbitstream", sharp});
    return out;
}

void apply_param_overrides(PolicyParams& params, std::string_view json_object) {
    apply_overrides(params, parse_json(json_object, "params"));
}

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json root = parse_json(json_text, "experiment config");
    check_keys(root, {"seed", "runs", "workers", "warmup_s", "video", "network", "scaling", "scenes", "params",
                      "algorithms"},
               "config");
    ExperimentConfig cfg;
    cfg.canonical = root.dump();
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) throw ValidationError("config: 'seed' must be a non-negative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    const int runs = get_int(root, "runs", static_cast<int>(cfg.runs));
    if (runs < 1) throw ValidationError("config: 'runs' must be >= 1");
    cfg.runs = static_cast<std::size_t>(runs);
    const int workers = get_int(root, "workers", 0);
    if (workers < 0) throw ValidationError("config: 'workers' must be >= 0");
    cfg.workers = static_cast<unsigned>(workers);
    cfg.warmup = get_number(root, "warmup_s", cfg.warmup);

    if (root.contains("video")) {
        const auto& v = root["video"];
        check_keys(v, {"segment_s", "duration_s", "b_max_s", "fov_deg", "fps", "grid", "tiers_mbps", "tile_split"},
                   "video");
        cfg.video.segment = get_number(v, "segment_s", cfg.video.segment);
        cfg.video.duration = get_number(v, "duration_s", cfg.video.duration);
        cfg.video.b_max = get_number(v, "b_max_s", cfg.video.b_max);
        cfg.video.fov = deg_to_rad(get_number(v, "fov_deg", rad_to_deg(cfg.video.fov)));
        cfg.video.fps = get_int(v, "fps", cfg.video.fps);
        if (v.contains("grid")) {
            const auto& g = v["grid"];
            if (!g.is_array() || g.size() != 2 || !g[0].is_number_integer() || !g[1].is_number_integer()) {
                throw ValidationError("config: video.grid must be [cols, rows]");
            }
            cfg.video.grid = TileGrid(g[0].get<int>(), g[1].get<int>());
        }
        std::vector<double> tiers = QualityLadder::default_tiers();
        if (v.contains("tiers_mbps")) {
            try {
                tiers = v["tiers_mbps"].get<std::vector<double>>();
            } catch (const json::exception&) {
                throw ValidationError("config: video.tiers_mbps must be a list of numbers");
            }
        }
        const auto split = get_string(v, "tile_split", "uniform");
        try {
            if (split == "uniform") {
                cfg.video.ladder = QualityLadder(tiers, cfg.video.grid.size());
            } else if (split == "solid-angle") {
                cfg.video.ladder = QualityLadder::solid_angle_weighted(tiers, cfg.video.grid);
            } else {
                throw ValidationError("config: video.tile_split must be 'uniform' or 'solid-angle'");
            }
        } catch (const std::invalid_argument& e) {
            throw ValidationError(fmt::format("config: {}", e.what()));
        }
    }
    try {
        cfg.video.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(fmt::format("config: {}", e.what()));
    }

    if (root.contains("scaling")) {
        const auto& s = root["scaling"];
        check_keys(s, {"global", "mean", "std", "clip_lo", "clip_hi"}, "scaling");
        cfg.scaling.global_scale = get_number(s, "global", cfg.scaling.global_scale);
        cfg.scaling.per_run_mean = get_number(s, "mean", cfg.scaling.per_run_mean);
        cfg.scaling.per_run_std = get_number(s, "std", cfg.scaling.per_run_std);
        cfg.scaling.clip_lo = get_number(s, "clip_lo", cfg.scaling.clip_lo);
        cfg.scaling.clip_hi = get_number(s, "clip_hi", cfg.scaling.clip_hi);
    }
    try {
        cfg.scaling.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(fmt::format("config: {}", e.what()));
    }

    const json network = root.value("network", json::object());
    check_keys(network, {"bundled", "bundle_seed", "traces"}, "network");
    const bool bundled_net = get_bool(network, "bundled", !network.contains("traces"));
    if (bundled_net) {
        const auto bundle_seed = network.contains("bundle_seed") ? network["bundle_seed"].get<std::uint64_t>() : 2024;
        for (auto& t : bundled_network_suite(bundle_seed)) cfg.traces.push_back(std::make_shared<NetworkTrace>(std::move(t)));
    }
    if (network.contains("traces")) {
        for (const auto& t : network["traces"]) {
            check_keys(t, {"path", "kind"}, "network.traces[]");
            const auto path = resolve(base_dir, get_string(t, "path", ""));
            const auto kind = parse_trace_kind(get_string(t, "kind", "mobile"));
            cfg.traces.push_back(std::make_shared<NetworkTrace>(load_network_trace(path, kind)));
        }
    }
    if (cfg.traces.empty()) throw ValidationError("config: no network traces");

    const json scenes = root.value("scenes", json::object());
    check_keys(scenes, {"bundled", "scripts", "detections"}, "scenes");
    const bool has_own = scenes.contains("scripts") || scenes.contains("detections");
    const auto suite = get_string(scenes, "bundled", has_own ? "" : "all");
    if (!suite.empty()) {
        for (auto& s : bundled_scene_suite(suite)) {
            auto src = std::make_shared<SceneSource>();
            src->name = s.name;
            src->script = std::move(s);
            cfg.scenes.push_back(std::move(src));
        }
    }
    if (scenes.contains("scripts")) {
        for (const auto& p : scenes["scripts"]) {
            if (!p.is_string()) throw ValidationError("config: scenes.scripts entries must be paths");
            auto src = std::make_shared<SceneSource>();
            src->script = load_scene_script(resolve(base_dir, p.get<std::string>()));
            src->name = src->script->name;
            cfg.scenes.push_back(std::move(src));
        }
    }
    if (scenes.contains("detections")) {
        for (const auto& d : scenes["detections"]) {
            check_keys(d, {"path", "gaze", "name"}, "scenes.detections[]");
            auto src = std::make_shared<SceneSource>();
            const auto path = resolve(base_dir, get_string(d, "path", ""));
            src->name = get_string(d, "name", path.stem().string());
            src->states = load_detection_trace(path);
            if (d.contains("gaze")) src->gaze = load_gaze_trace(resolve(base_dir, get_string(d, "gaze", "")));
            cfg.scenes.push_back(std::move(src));
        }
    }
    if (cfg.scenes.empty()) throw ValidationError("config: no scenes");

    if (root.contains("params")) apply_overrides(cfg.params, root["params"]);

    if (root.contains("algorithms")) {
        std::set<std::string> names;
        for (const auto& a : root["algorithms"]) {
            AlgorithmEntry entry;
            if (a.is_string()) {
                const auto name = a.get<std::string>();
                const auto defaults = default_algorithms(cfg.params);
                const auto it = std::find_if(defaults.begin(), defaults.end(),
                                             [&](const AlgorithmEntry& e) { return e.name == name; });
                if (it == defaults.end()) throw ValidationError(fmt::format("config: unknown algorithm '{}'", name));
                entry = *it;
            } else {
                check_keys(a, {"name", "policy", "params"}, "algorithms[]");
                entry.policy = get_string(a, "policy", "");
                entry.name = get_string(a, "name", entry.policy);
                entry.params = cfg.params;
                if (a.contains("params")) apply_overrides(entry.params, a["params"]);
            }
            const auto& known = policy_names();
            if (std::find(known.begin(), known.end(), entry.policy) == known.end()) {
                throw ValidationError(fmt::format("config: unknown policy '{}'", entry.policy));
            }
            if (!names.insert(entry.name).second) {
                throw ValidationError(fmt::format("config: duplicate algorithm name '{}'", entry.name));
            }
            cfg.algorithms.push_back(std::move(entry));
        }
    } else {
        cfg.algorithms = default_algorithms(cfg.params);
    }
    if (cfg.algorithms.empty()) throw ValidationError("config: no algorithms");
    for (const auto& a : cfg.algorithms) {
        try {
            a.params.validate();
        } catch (const std::invalid_argument& e) {
            throw ValidationError(fmt::format("config: algorithm '{}': {}", a.name, e.what()));
        }
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_text(path), path.parent_path());
}

unsigned resolve_workers(const ExperimentSpec& spec) {
    if (spec.workers && *spec.workers > 0) return *spec.workers;
    if (const char* env = std::getenv("ORBITSTREAM_WORKERS")) {
        const auto v = detail::to_double(env);
        if (v && *v >= 1.0) return static_cast<unsigned>(*v);
    }
    if (spec.config.workers > 0) return spec.config.workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

std::vector<AlgorithmEntry> selected_algorithms(const ExperimentSpec& spec) {
    std::vector<AlgorithmEntry> out;
    for (const auto& name : spec.algorithms) {
        const auto& all = spec.config.algorithms;
        if (std::none_of(all.begin(), all.end(), [&](const AlgorithmEntry& a) { return a.name == name; })) {
            throw ValidationError(fmt::format("unknown algorithm '{}'", name));
        }
    }
    for (auto a : spec.config.algorithms) {
        if (!spec.algorithms.empty() &&
            std::find(spec.algorithms.begin(), spec.algorithms.end(), a.name) == spec.algorithms.end()) {
            continue;
        }
        if (a.policy == "orbitstream") {
            if (spec.flat_mass) a.params.flat_mass = true;
            if (spec.beta) a.params.field.beta = *spec.beta;
            if (spec.delta_zero) {
                a.params.field.delta = 0.0;
                a.params.field.allow_zero_delta = true;
            }
            if (spec.dropout) a.params.dropout = *spec.dropout;
        }
        out.push_back(std::move(a));
    }
    return out;
}

RunConfig base_run(const ExperimentConfig& cfg, const AlgorithmEntry& a, std::uint64_t seed) {
    RunConfig rc;
    rc.algorithm = a.name;
    rc.policy = a.policy;
    rc.video = cfg.video;
    rc.params = a.params;
    rc.scaling = cfg.scaling;
    rc.seed = seed;
    rc.warmup = cfg.warmup;
    return rc;
}

std::string spec_fingerprint(const ExperimentSpec& spec, const std::vector<AlgorithmEntry>& algos, std::uint64_t seed,
                             std::size_t runs) {
    std::string s = spec.config.canonical;
    s += fmt::format("|seed={}|runs={}|flat={}|delta0={}", seed, runs, spec.flat_mass, spec.delta_zero);
    if (spec.beta) s += fmt::format("|beta={}", *spec.beta);
    if (spec.dropout) s += fmt::format("|dropout={}", *spec.dropout);
    for (const auto& a : algos) s += "|" + a.name;
    return hex64(stable_hash(s));
}

}  // namespace

ReportBundle run_experiment(const ExperimentSpec& spec, const ProgressFn& progress) {
    const auto algos = selected_algorithms(spec);
    if (algos.empty()) throw ValidationError("no algorithms selected");
    const auto seed = spec.seed.value_or(spec.config.seed);
    const auto runs = spec.runs.value_or(spec.config.runs);
    if (runs < 1) throw ValidationError("runs must be >= 1");

    std::vector<RunConfig> bases;
    for (const auto& a : algos) bases.push_back(base_run(spec.config, a, seed));
    McOptions opts;
    opts.runs = runs;
    opts.workers = resolve_workers(spec);
    opts.progress = progress;

    ReportBundle bundle;
    bundle.provenance.config_hash = spec_fingerprint(spec, algos, seed, runs);
    bundle.provenance.seed = seed;
    bundle.provenance.runs = runs;
    for (const auto& a : algos) bundle.provenance.algorithms.push_back(a.name);
    bundle.mc = run_monte_carlo(bases, spec.config.traces, spec.config.scenes, opts);
    return bundle;
}

std::vector<AlgorithmSummary> sorted_summary(const McSummary& summary) {
    auto rows = summary.algorithms;
    std::stable_sort(rows.begin(), rows.end(),
                     [](const AlgorithmSummary& a, const AlgorithmSummary& b) { return a.qoe_mean > b.qoe_mean; });
    return rows;
}

namespace {

using detail::num;

std::string header_line(const Provenance& p) {
    return fmt::format("# orbitstream {} config_hash={} seed={} runs={} algorithms={}\n", p.version, p.config_hash,
                       p.seed, p.runs, fmt::join(p.algorithms, ";"));
}

std::string join_ints(const std::vector<int>& v) { return fmt::format("{}", fmt::join(v, " ")); }

bool is_approximation(const std::string& name) { return name.ends_with("-approx"); }

}  // namespace

std::string summary_csv(const std::vector<AlgorithmSummary>& rows, const Provenance& p) {
    std::string out = header_line(p);
    out += "algorithm,qoe_mean,qoe_std,eqv_bitrate_mbps,buffer_mean_s,buffer_std_s,buffer_min_s,switches,stalls,"
           "decision_ms\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.algorithm, num(r.qoe_mean), num(r.qoe_std),
                           num(r.eqv_bitrate), num(r.buffer_mean), num(r.buffer_std), num(r.buffer_min),
                           num(r.switches), num(r.stalls), num(r.decision_ms));
    }
    return out;
}

std::string cdf_csv(const std::vector<AlgorithmSummary>& rows, const Provenance& p) {
    std::string out = header_line(p);
    out += "algorithm,qoe,cum_prob\n";
    for (const auto& r : rows) {
        for (const auto& [q, c] : r.cdf) out += fmt::format("{},{},{}\n", r.algorithm, num(q), num(c));
    }
    return out;
}

namespace {

constexpr std::string_view kRunsHeader =
    "algorithm,run,trace,scene,chunk,t_start,idle,buffer_start,download_time,stall,buffer_end,tier,rate_mbps,"
    "c_hat_mbps,chunk_mbits,tile_tiers,predicted,truth,iou,qoe_utility,qoe_stall,qoe_smoothness,qoe_viewport,"
    "qoe_total,eqv_mbps,singularities";

}  // namespace

std::string runs_csv(const std::vector<RunResult>& runs, const Provenance& p) {
    std::string out = header_line(p);
    out += kRunsHeader;
    out += '\n';
    for (const auto& run : runs) {
        for (const auto& r : run.records) {
            out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                               run.algorithm, run.run_index, run.trace, run.scene, r.index, num(r.t_start),
                               num(r.idle), num(r.buffer_start), num(r.download_time), num(r.stall),
                               num(r.buffer_end), r.tier, num(r.rate), num(r.c_hat), num(r.chunk_mbits),
                               join_ints(r.tile_tiers), join_ints(r.predicted), join_ints(r.truth), num(r.iou),
                               num(r.qoe.utility), num(r.qoe.stall), num(r.qoe.smoothness), num(r.qoe.viewport),
                               num(r.qoe.total), num(r.eqv_mbps), r.singularities);
        }
    }
    return out;
}

std::vector<ParsedRun> parse_runs_csv(std::string_view text) {
    std::vector<ParsedRun> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    auto ints = [](std::string_view s) {
        std::vector<int> v;
        std::istringstream ss{std::string(s)};
        int x = 0;
        while (ss >> x) v.push_back(x);
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != kRunsHeader) throw ParseError(fmt::format("line {}: unexpected runs header", line_no));
            header_seen = true;
            continue;
        }
        const auto f = detail::split_csv(line);
        if (f.size() != 26) throw ParseError(fmt::format("line {}: expected 26 fields, got {}", line_no, f.size()));
        auto d = [&](std::size_t i) { return detail::require_double(f[i], line_no, fmt::format("#{}", i + 1)); };
        const auto run_index = static_cast<std::size_t>(d(1));
        if (out.empty() || out.back().algorithm != f[0] || out.back().run_index != run_index) {
            out.push_back({std::string(f[0]), run_index, {}});
        }
        ChunkRecord r;
        r.index = static_cast<int>(d(4));
        r.t_start = d(5);
        r.idle = d(6);
        r.buffer_start = d(7);
        r.download_time = d(8);
        r.stall = d(9);
        r.buffer_end = d(10);
        r.tier = static_cast<int>(d(11));
        r.rate = d(12);
        r.c_hat = d(13);
        r.chunk_mbits = d(14);
        r.tile_tiers = ints(f[15]);
        r.predicted = ints(f[16]);
        r.truth = ints(f[17]);
        r.iou = d(18);
        r.qoe.utility = d(19);
        r.qoe.stall = d(20);
        r.qoe.smoothness = d(21);
        r.qoe.viewport = d(22);
        r.qoe.total = d(23);
        r.eqv_mbps = d(24);
        r.singularities = static_cast<std::uint64_t>(d(25));
        out.back().records.push_back(std::move(r));
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error(fmt::format("write failed for '{}'", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

namespace {

json summary_json(const std::vector<AlgorithmSummary>& rows, const ReportBundle& b) {
    json doc;
    doc["version"] = b.provenance.version;
    doc["config_hash"] = b.provenance.config_hash;
    doc["seed"] = b.provenance.seed;
    doc["runs"] = b.provenance.runs;
    doc["algorithms"] = json::array();
    for (const auto& r : rows) {
        doc["algorithms"].push_back({{"algorithm", r.algorithm},
                                     {"approximation", is_approximation(r.algorithm)},
                                     {"runs", r.runs},
                                     {"failures", r.failures},
                                     {"qoe_mean", r.qoe_mean},
                                     {"qoe_std", r.qoe_std},
                                     {"eqv_bitrate_mbps", r.eqv_bitrate},
                                     {"buffer_mean_s", r.buffer_mean},
                                     {"buffer_std_s", r.buffer_std},
                                     {"buffer_min_s", r.buffer_min},
                                     {"switches", r.switches},
                                     {"stalls", r.stalls},
                                     {"stall_s", r.stall_s},
                                     {"decision_ms", r.decision_ms},
                                     {"hit_ratio_pct", r.hit_ratio},
                                     {"viewport_penalty", r.viewport_penalty},
                                     {"singularities", r.singularities}});
    }
    doc["failures"] = json::array();
    for (const auto& f : b.mc.summary.failures) {
        doc["failures"].push_back({{"algorithm", f.algorithm}, {"run", f.run_index}, {"reason", f.failure}});
    }
    return doc;
}

}  // namespace

void emit_report(const ReportBundle& bundle, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
    const auto& p = bundle.provenance;
    const auto rows = sorted_summary(bundle.mc.summary);

    write_file_atomic(out_dir / "summary.csv", summary_csv(rows, p));
    std::string stability = header_line(p) + "algorithm,mean_buffer_s,std_buffer_s,min_buffer_s,switches\n";
    for (const auto& r : rows) {
        stability += fmt::format("{},{},{},{},{}\n", r.algorithm, num(r.buffer_mean), num(r.buffer_std),
                                 num(r.buffer_min), num(r.switches));
    }
    write_file_atomic(out_dir / "buffer_stability.csv", stability);
    write_file_atomic(out_dir / "cdf.csv", cdf_csv(rows, p));
    write_file_atomic(out_dir / "runs.csv", runs_csv(bundle.mc.runs, p));

    std::string latency = header_line(p) + "algorithm,run,chunk,latency_ms\n";
    for (const auto& run : bundle.mc.runs) {
        for (const auto& r : run.records) {
            latency += fmt::format("{},{},{},{}\n", run.algorithm, run.run_index, r.index, num(r.latency_ms));
        }
    }
    write_file_atomic(out_dir / "latency.csv", latency);

    std::string failures = header_line(p) + "algorithm,run,trace,scene,reason\n";
    for (const auto& f : bundle.mc.summary.failures) {
        std::string reason = f.failure;
        std::replace(reason.begin(), reason.end(), ',', ';');
        std::replace(reason.begin(), reason.end(), '\n', ' ');
        failures += fmt::format("{},{},{},{},{}\n", f.algorithm, f.run_index, f.trace, f.scene, reason);
    }
    write_file_atomic(out_dir / "failures.csv", failures);
    write_file_atomic(out_dir / "summary.json", summary_json(rows, bundle).dump(2) + "\n");
}

const std::vector<std::string>& ablation_names() {
    static const std::vector<std::string> names{"flat-mass", "beta-sweep", "delta-zero", "dropout"};
    return names;
}

AblationResult run_ablation(const ExperimentSpec& spec, std::string_view ablation, const ProgressFn& progress) {
    const auto& names = ablation_names();
    if (std::find(names.begin(), names.end(), ablation) == names.end()) {
        throw ValidationError(fmt::format("unknown ablation '{}'", ablation));
    }
    const auto& all = spec.config.algorithms;
    const auto it = std::find_if(all.begin(), all.end(), [](const AlgorithmEntry& a) { return a.policy == "orbitstream"; });
    AlgorithmEntry base = it != all.end() ? *it : AlgorithmEntry{"orbitstream", "orbitstream", spec.config.params};
    base.name = "orbitstream";

    std::vector<AlgorithmEntry> variants;
    if (ablation == "flat-mass") {
        auto v = base;
        v.params.flat_mass = true;
        v.name = "orbitstream+flat-mass";
        variants.push_back(std::move(v));
    } else if (ablation == "beta-sweep") {
        for (double beta : {0.25, 0.5, 1.0, 1.5}) {
            auto v = base;
            v.params.field.beta = beta;
            v.name = fmt::format("orbitstream+beta={}", beta);
            variants.push_back(std::move(v));
        }
    } else if (ablation == "delta-zero") {
        auto v = base;
        v.params.field.delta = 0.0;
        v.params.field.allow_zero_delta = true;
        v.name = "orbitstream+delta-zero";
        variants.push_back(std::move(v));
    } else {
        auto v = base;
        v.params.dropout = spec.dropout.value_or(0.3);
        v.name = fmt::format("orbitstream+dropout={}", v.params.dropout);
        variants.push_back(std::move(v));
    }

    AblationResult result;
    result.ablation = std::string(ablation);
    auto run_one = [&](const AlgorithmEntry& entry) {
        ExperimentSpec s = spec;
        s.config.algorithms = {entry};
        s.algorithms.clear();
        s.flat_mass = false;
        s.beta.reset();
        s.delta_zero = false;
        s.dropout.reset();
        return run_experiment(s, progress);
    };
    result.baseline = run_one(base);
    for (const auto& v : variants) result.variants.push_back(run_one(v));

    for (const auto& vb : result.variants) {
        const auto& br = result.baseline.mc.runs;
        const auto& vr = vb.mc.runs;
        for (std::size_t i = 0; i < std::min(br.size(), vr.size()); ++i) {
            PairedDelta d;
            d.variant = vr[i].algorithm;
            d.run_index = vr[i].run_index;
            d.trace = vr[i].trace;
            d.scene = vr[i].scene;
            d.hit_base = br[i].stats.hit_ratio;
            d.hit_variant = vr[i].stats.hit_ratio;
            d.qoe_base = br[i].stats.qoe_mean;
            d.qoe_variant = vr[i].stats.qoe_mean;
            d.viewport_base = br[i].stats.qoe_terms_mean.viewport;
            d.viewport_variant = vr[i].stats.qoe_terms_mean.viewport;
            d.singularities = vr[i].stats.singularities;
            result.deltas.push_back(std::move(d));
        }
    }
    return result;
}

void emit_ablation(const AblationResult& result, const std::filesystem::path& out_dir) {
    emit_report(result.baseline, out_dir / "baseline");
    for (std::size_t i = 0; i < result.variants.size(); ++i) {
        emit_report(result.variants[i], out_dir / fmt::format("variant-{}", i));
    }
    std::string csv = header_line(result.baseline.provenance);
    csv += "variant,run,trace,scene,hit_base,hit_variant,d_hit,qoe_base,qoe_variant,d_qoe,viewport_base,"
           "viewport_variant,d_viewport,singularities\n";
    json doc;
    doc["ablation"] = result.ablation;
    doc["config_hash"] = result.baseline.provenance.config_hash;
    doc["variants"] = json::array();
    for (const auto& vb : result.variants) {
        const auto& name = vb.provenance.algorithms.front();
        double dh = 0.0, dq = 0.0, dv = 0.0;
        std::uint64_t sing = 0;
        std::size_t n = 0;
        for (const auto& d : result.deltas) {
            if (d.variant != name) continue;
            dh += d.hit_variant - d.hit_base;
            dq += d.qoe_variant - d.qoe_base;
            dv += d.viewport_variant - d.viewport_base;
            sing += d.singularities;
            ++n;
        }
        const double nn = n > 0 ? static_cast<double>(n) : 1.0;
        doc["variants"].push_back({{"variant", name},
                                   {"runs", n},
                                   {"mean_hit_delta_pct", dh / nn},
                                   {"mean_qoe_delta", dq / nn},
                                   {"mean_viewport_delta", dv / nn},
                                   {"singularities", sing}});
    }
    for (const auto& d : result.deltas) {
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", d.variant, d.run_index, d.trace, d.scene,
                           num(d.hit_base), num(d.hit_variant), num(d.hit_variant - d.hit_base), num(d.qoe_base),
                           num(d.qoe_variant), num(d.qoe_variant - d.qoe_base), num(d.viewport_base),
                           num(d.viewport_variant), num(d.viewport_variant - d.viewport_base), d.singularities);
    }
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "paired_deltas.csv", csv);
    write_file_atomic(out_dir / "ablation.json", doc.dump(2) + "\n");
}

}  // namespace orbitstream
