#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "orbitstream/baselines.hpp"
#include "orbitstream/channel.hpp"
#include "orbitstream/engine.hpp"
#include "orbitstream/gvp.hpp"
#include "orbitstream/scenarios.hpp"

using namespace orbitstream;

namespace {

SceneState busy_scene(std::size_t objects) {
    Rng rng(11);
    std::uniform_real_distribution<double> yaw(-kPi, kPi);
    std::uniform_real_distribution<double> pitch(-1.2, 1.2);
    SceneState s;
    for (std::size_t i = 0; i < objects; ++i) {
        s.objects.push_back({"o" + std::to_string(i), ObjectClass::pedestrian, {yaw(rng), pitch(rng)}, 1.0});
    }
    return s;
}

void BM_BoltzmannMap(benchmark::State& state) {
    const auto scene = busy_scene(static_cast<std::size_t>(state.range(0)));
    const TileGrid grid;
    const FieldParams params;
    for (auto _ : state) benchmark::DoNotOptimize(boltzmann_probs(scene, grid, params));
}
BENCHMARK(BM_BoltzmannMap)->Arg(4)->Arg(32);

void BM_PredictViewport(benchmark::State& state) {
    const std::vector<SceneState> forecast{busy_scene(static_cast<std::size_t>(state.range(0)))};
    const TileGrid grid;
    const FieldParams params;
    Rng rng(3);
    const GazeState start{to_unit(SphericalCoord(0.1, 0.0)), {}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(predict_viewport(start, forecast, params, grid, deg_to_rad(80.0), rng));
    }
}
BENCHMARK(BM_PredictViewport)->Arg(4)->Arg(32);

void BM_OrbitStreamDecision(benchmark::State& state) {
    const VideoConfig video;
    auto policy = make_policy("orbitstream", PolicyParams{}, video, 5);
    const auto scene = busy_scene(6);
    PolicyContext ctx;
    ctx.buffer = 4.5;
    ctx.scene = &scene;
    ctx.startup_capacity = 8.0;
    ctx.history = {{0, 7.5}, {1, 8.1}, {2, 6.9}};
    for (auto _ : state) benchmark::DoNotOptimize(policy->decide(ctx));
}
BENCHMARK(BM_OrbitStreamDecision);

void BM_MpcDecide(benchmark::State& state) {
    MpcParams params;
    params.horizon = static_cast<int>(state.range(0));
    const QualityLadder ladder;
    AbrObservation obs;
    obs.buffer = 5.0;
    obs.last_tier = 2;
    obs.throughput_history = {{0, 6.0}, {1, 7.0}, {2, 5.5}, {3, 8.0}, {4, 6.5}};
    for (auto _ : state) benchmark::DoNotOptimize(mpc_decide(obs, params, ladder));
}
BENCHMARK(BM_MpcDecide)->DenseRange(1, 5);

void BM_SimulateRun(benchmark::State& state) {
    const auto traces = bundled_network_suite();
    RunConfig cfg;
    cfg.algorithm = cfg.policy = "orbitstream";
    cfg.network = std::make_shared<const NetworkTrace>(traces.front());
    auto scene = std::make_shared<SceneSource>();
    scene->script = hazard_tracking_suite().front();
    scene->name = scene->script->name;
    cfg.scene = scene;
    cfg.seed = 1;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_run(cfg));
}
BENCHMARK(BM_SimulateRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
