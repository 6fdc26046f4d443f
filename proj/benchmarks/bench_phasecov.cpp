#include <benchmark/benchmark.h>

#include "phasecov/bosonic_channels.hpp"
#include "phasecov/nds_probes.hpp"
#include "phasecov/oracles.hpp"
#include "phasecov/pcgc_bounds.hpp"
#include "phasecov/qfi_engine.hpp"

using namespace phasecov;

static void BM_ClosedFormPs(benchmark::State& state) {
  const ResourceBudget budget(10.0, 5.0);
  double kappa = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(closed_form_ps(kappa, 1.0, budget));
    kappa = kappa > 0.98 ? 0.01 : kappa + 0.01;
  }
}
BENCHMARK(BM_ClosedFormPs);

static void BM_BoundK2(benchmark::State& state) {
  const ScenarioId id{Scenario::ps_loss, 0.0, true};
  const double theta[] = {0.5, 1.0};
  const ResourceBudget budget(10.0, 5.0);
  for (auto _ : state) benchmark::DoNotOptimize(qfim_upper_bound(scenario_cascade(id, theta), budget));
}
BENCHMARK(BM_BoundK2);

static void BM_AmplifierKraus(benchmark::State& state) {
  const FockTruncation t = FockTruncation::single(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(amplifier_kraus(1.5, t));
}
BENCHMARK(BM_AmplifierKraus)->Arg(5)->Arg(20);

static void BM_UhlmannThermal(benchmark::State& state) {
  const DensityOperator a = thermal_state(1.0, 60);
  const DensityOperator b = thermal_state(2.0, 60);
  for (auto _ : state) benchmark::DoNotOptimize(uhlmann_fidelity(a, b));
}
BENCHMARK(BM_UhlmannThermal);

static void BM_OracleTmsvPs(benchmark::State& state) {
  const OracleProbe probe = tmsv_probe(0.3);
  const ScenarioId id{Scenario::ps_loss, 0.2, false};
  const double theta[] = {0.6};
  for (auto _ : state) benchmark::DoNotOptimize(oracle_scenario_qfim(id, theta, probe));
}
BENCHMARK(BM_OracleTmsvPs)->Unit(benchmark::kMillisecond);

static void BM_AmpOutputFidelity(benchmark::State& state) {
  const ProbeSpec spec = ProbeSpec::iid_geometric(0.3, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(amp_output_fidelity(spec.photon_dist(), spec.photon_dist(), 1.2, 1.5, 2));
  }
}
BENCHMARK(BM_AmpOutputFidelity);
BENCHMARK_MAIN();
