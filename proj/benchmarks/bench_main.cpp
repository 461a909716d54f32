#include <benchmark/benchmark.h>

#include <random>

#include "attnav/analysis.hpp"
#include "attnav/network.hpp"
#include "attnav/scenario.hpp"
#include "attnav/simulation.hpp"
#include "attnav/so3.hpp"
#include "attnav/sysid.hpp"

using namespace attnav;

namespace {

std::vector<Rotation> random_bodies(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  std::vector<Rotation> out;
  for (int i = 0; i < n; ++i) out.push_back(exp_so3(Vector3(normal(rng), normal(rng), normal(rng))));
  return out;
}

void BM_ExpLog(benchmark::State& state) {
  Vector3 v(0.3, -1.1, 0.7);
  for (auto _ : state) {
    const Rotation r = exp_so3(v);
    v = log_so3(r);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_ExpLog);

void BM_StealthyProjector(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const NetworkState net(random_bodies(n, 7));
  for (auto _ : state) benchmark::DoNotOptimize(stealthy_projector_A(net));
}
BENCHMARK(BM_StealthyProjector)->Arg(3)->Arg(5)->Arg(10)->Arg(20);

ScenarioConfig loop_config(int n) {
  ScenarioConfig cfg;
  cfg.id = "bench";
  cfg.n = n;
  cfg.duration_s = 1e6;
  cfg.initial.mode = InitialConfig::Mode::Random;
  cfg.op.kind = OperatorSpec::Kind::Passive;
  cfg.autonomous.kind = AutonomousSpec::Kind::DemoConsensus;
  return cfg;
}

void BM_ClosedLoopTick(benchmark::State& state) {
  ClosedLoop loop(loop_config(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(loop.step());
}
BENCHMARK(BM_ClosedLoopTick)->Arg(3)->Arg(10);

void BM_PassivitySweep(benchmark::State& state) {
  const TransferMatrix2x2 model = passive_reference_model();
  for (auto _ : state) benchmark::DoNotOptimize(passivity_sweep(model, 1e-2, 1e2, 400));
}
BENCHMARK(BM_PassivitySweep);

void BM_IdentifySession(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.id = "bench-id";
  cfg.n = 3;
  cfg.duration_s = 120.0;
  cfg.seed = 3;
  cfg.initial.mode = InitialConfig::Mode::Random;
  cfg.reference.trial_s = 15.0;
  cfg.op.kind = OperatorSpec::Kind::Synthetic;
  cfg.op.model = passive_reference_model();
  const SessionLog log = session_from_trajectory(run_scenario(cfg));
  for (auto _ : state) benchmark::DoNotOptimize(identify_session(log, IdentificationConfig{}));
}
BENCHMARK(BM_IdentifySession)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
