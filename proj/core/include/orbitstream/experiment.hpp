#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orbitstream/engine.hpp"

namespace orbitstream {

inline constexpr std::string_view kVersion = "0.1.0";

struct AlgorithmEntry {
    std::string name;
    std::string policy;
    PolicyParams params;
};

/// Fully resolved experiment configuration.
struct ExperimentConfig {
    std::uint64_t seed = 2024;
    std::size_t runs = 300;
    unsigned workers = 0;  ///< 0: hardware concurrency
    double warmup = 20.0;
    VideoConfig video;
    ScalingParams scaling;
    PolicyParams params;  ///< shared defaults before per-algorithm overrides
    std::vector<std::shared_ptr<const NetworkTrace>> traces;
    std::vector<std::shared_ptr<const SceneSource>> scenes;
    std::vector<AlgorithmEntry> algorithms;
    std::string canonical;  ///< normalized config text, input to the hash
};

/// The twelve default algorithm entries.
std::vector<AlgorithmEntry> default_algorithms(const PolicyParams& params = {});

/// Applies a JSON object of parameter overrides. Unknown keys throw ValidationError.
void apply_param_overrides(PolicyParams& params, std::string_view json_object);

/// Parses a JSON experiment config; relative paths resolve against `base_dir`.
/// Missing blocks fall back to the bundled traces, the full scene suite and the default algorithms.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ExperimentSpec {
    ExperimentConfig config;
    std::vector<std::string> algorithms;  ///< filter by name; empty keeps all
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    // Ablation switches applied to every orbitstream entry.
    bool flat_mass = false;
    std::optional<double> beta;
    bool delta_zero = false;
    std::optional<double> dropout;
};

/// Worker count: explicit spec value, else ORBITSTREAM_WORKERS, else the config, else hardware concurrency.
unsigned resolve_workers(const ExperimentSpec& spec);

struct Provenance {
    std::string version{kVersion};
    std::string config_hash;
    std::uint64_t seed = 0;
    std::size_t runs = 0;
    std::vector<std::string> algorithms;
};

struct ReportBundle {
    Provenance provenance;
    McResult mc;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Resolves the spec into run configs and executes the Monte Carlo.
ReportBundle run_experiment(const ExperimentSpec& spec, const ProgressFn& progress = {});

/// Writes summary.csv, buffer_stability.csv, cdf.csv, runs.csv, latency.csv, failures.csv and summary.json.
/// Every file is written to a temporary name and renamed into place.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& out_dir);

/// Summary rows sorted by mean QoE, descending; ties keep the input order.
std::vector<AlgorithmSummary> sorted_summary(const McSummary& summary);

/// Text writers shared by emit_report and the tests.
std::string summary_csv(const std::vector<AlgorithmSummary>& rows, const Provenance& p);
std::string cdf_csv(const std::vector<AlgorithmSummary>& rows, const Provenance& p);
std::string runs_csv(const std::vector<RunResult>& runs, const Provenance& p);

/// Parsed per-run CSV: one record list per (algorithm, run), in file order.
struct ParsedRun {
    std::string algorithm;
    std::size_t run_index = 0;
    std::vector<ChunkRecord> records;
};
std::vector<ParsedRun> parse_runs_csv(std::string_view text);

const std::vector<std::string>& ablation_names();

struct PairedDelta {
    std::string variant;
    std::size_t run_index = 0;
    std::string trace;
    std::string scene;
    double hit_base = 0.0;
    double hit_variant = 0.0;
    double qoe_base = 0.0;
    double qoe_variant = 0.0;
    double viewport_base = 0.0;
    double viewport_variant = 0.0;
    std::uint64_t singularities = 0;
};

struct AblationResult {
    std::string ablation;
    ReportBundle baseline;
    std::vector<ReportBundle> variants;  ///< one per variant setting
    std::vector<PairedDelta> deltas;
};

/// Matched-seed baseline and variant runs of the first orbitstream entry.
/// Variants: flat-mass, beta-sweep (0.25, 0.5, 1.0, 1.5), delta-zero, dropout (spec.dropout or 0.3).
AblationResult run_ablation(const ExperimentSpec& spec, std::string_view ablation, const ProgressFn& progress = {});
void emit_ablation(const AblationResult& result, const std::filesystem::path& out_dir);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace orbitstream
