#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "orbitstream/channel.hpp"
#include "orbitstream/errors.hpp"
#include "orbitstream/experiment.hpp"
#include "orbitstream/scenarios.hpp"

namespace fs = std::filesystem;
using namespace orbitstream;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;

struct CommonOptions {
    std::string config;
    std::string out;
    std::vector<std::string> algos;
    std::optional<std::size_t> runs;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", o.out, "Output directory")->required();
    cmd->add_option("--runs", o.runs, "Runs per algorithm");
    cmd->add_option("--seed", o.seed, "Base seed");
    cmd->add_option("--workers", o.workers, "Worker threads (overrides ORBITSTREAM_WORKERS)");
    cmd->add_flag("--quiet", o.quiet, "No progress output");
}

ExperimentSpec make_spec(const CommonOptions& o) {
    ExperimentSpec spec;
    spec.config = load_experiment_config(o.config);
    spec.algorithms = o.algos;
    spec.runs = o.runs;
    spec.seed = o.seed;
    spec.workers = o.workers;
    return spec;
}

ProgressFn progress_printer(bool quiet) {
    if (quiet) return {};
    return [](std::size_t done, std::size_t total) {
        if (done == total || done % 50 == 0) fmt::print(stderr, "\r{}/{} runs", done, total);
        if (done == total) fmt::print(stderr, "\n");
    };
}

int report_failures(const McSummary& s) {
    if (s.failures.empty()) return kExitOk;
    fmt::print(stderr, "{} run(s) failed; see failures.csv\n", s.failures.size());
    return kExitPartial;
}

int cmd_simulate(const CommonOptions& o, bool flat_mass, std::optional<double> beta, bool delta_zero,
                 std::optional<double> dropout) {
    auto spec = make_spec(o);
    spec.flat_mass = flat_mass;
    spec.beta = beta;
    spec.delta_zero = delta_zero;
    spec.dropout = dropout;
    const auto bundle = run_experiment(spec, progress_printer(o.quiet));
    emit_report(bundle, o.out);
    for (const auto& row : sorted_summary(bundle.mc.summary)) {
        fmt::print("{:22} qoe {:8.3f} +- {:6.3f}  buffer {:5.2f} s  std {:5.2f} s  stalls {:5.2f}  {:.3f} ms\n",
                   row.algorithm, row.qoe_mean, row.qoe_std, row.buffer_mean, row.buffer_std, row.stalls,
                   row.decision_ms);
    }
    return report_failures(bundle.mc.summary);
}

int cmd_ablate(const CommonOptions& o, const std::string& variant, std::optional<double> dropout) {
    auto spec = make_spec(o);
    spec.dropout = dropout;
    const auto result = run_ablation(spec, variant, progress_printer(o.quiet));
    emit_ablation(result, o.out);
    const auto& base = result.baseline.mc.summary.algorithms.front();
    fmt::print("{:26} hit {:6.2f}%  qoe {:8.3f}  viewport {:6.3f}\n", base.algorithm, base.hit_ratio, base.qoe_mean,
               base.viewport_penalty);
    int status = report_failures(result.baseline.mc.summary);
    for (const auto& v : result.variants) {
        const auto& a = v.mc.summary.algorithms.front();
        fmt::print("{:26} hit {:6.2f}%  qoe {:8.3f}  viewport {:6.3f}  singularities {:.1f}\n", a.algorithm,
                   a.hit_ratio, a.qoe_mean, a.viewport_penalty, a.singularities);
        status = std::max(status, report_failures(v.mc.summary));
    }
    return status;
}

int cmd_gen_traces(const std::string& out, std::uint64_t seed) {
    const fs::path root(out);
    fs::create_directories(root / "network");
    fs::create_directories(root / "scenes");
    for (const auto& trace : bundled_network_suite(seed)) {
        std::ostringstream csv;
        write_network_trace(csv, trace);
        write_file_atomic(root / "network" / (trace.name() + ".csv"), csv.str());
        fmt::print("{:18} {:9} mean {:6.2f} Mbps  std {:5.2f}\n", trace.name(), to_string(trace.kind()), trace.mean(),
                   trace.stddev());
    }
    for (const auto& script : bundled_scene_suite("all")) {
        write_file_atomic(root / "scenes" / (script.name + ".json"), dump_scene_script(script) + "\n");
    }
    return kExitOk;
}

int cmd_validate(const std::string& path) {
    const auto cfg = load_experiment_config(path);
    fmt::print("config ok: {} algorithm(s), {} trace(s), {} scene(s), {} run(s), {} chunk(s) per run\n",
               cfg.algorithms.size(), cfg.traces.size(), cfg.scenes.size(), cfg.runs, cfg.video.chunks());
    for (const auto& a : cfg.algorithms) fmt::print("  {} ({})\n", a.name, a.policy);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tile-based 360-degree ABR simulator"};
    app.require_subcommand(1);

    CommonOptions sim;
    bool flat_mass = false;
    bool delta_zero = false;
    std::optional<double> beta;
    std::optional<double> sim_dropout;
    auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo experiment and write the report");
    add_common(simulate, sim);
    simulate->add_option("--algos", sim.algos, "Comma-separated algorithm names")->delimiter(',');
    simulate->add_flag("--flat-mass", flat_mass, "Set every semantic mass to 1 for orbitstream entries");
    simulate->add_option("--beta", beta, "Override beta for orbitstream entries");
    simulate->add_flag("--delta-zero", delta_zero, "Run orbitstream entries with delta = 0");
    simulate->add_option("--dropout", sim_dropout, "Detection dropout probability for orbitstream entries");

    CommonOptions abl;
    std::string variant;
    std::optional<double> abl_dropout;
    auto* ablate = app.add_subcommand("ablate", "Run a paired ablation against the orbitstream baseline");
    add_common(ablate, abl);
    ablate->add_option("--variant", variant, "flat-mass | beta-sweep | delta-zero | dropout")
        ->required()
        ->check(CLI::IsMember(ablation_names()));
    ablate->add_option("--dropout", abl_dropout, "Dropout probability for the dropout variant (default 0.3)");

    std::string gen_out;
    std::uint64_t gen_seed = 2024;
    auto* gen = app.add_subcommand("gen-traces", "Write the bundled network traces and scene scripts");
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--seed", gen_seed, "Generation seed");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check an experiment config");
    validate->add_option("--config", validate_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim, flat_mass, beta, delta_zero, sim_dropout);
        if (ablate->parsed()) return cmd_ablate(abl, variant, abl_dropout);
        if (gen->parsed()) return cmd_gen_traces(gen_out, gen_seed);
        if (validate->parsed()) return cmd_validate(validate_path);
    } catch (const ParseError& e) {
        fmt::print(stderr, "parse error: {}\n", e.what());
    } catch (const ValidationError& e) {
        fmt::print(stderr, "invalid config: {}\n", e.what());
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
    }
    return kExitError;
}
