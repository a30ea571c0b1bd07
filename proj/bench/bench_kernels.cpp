#include <benchmark/benchmark.h>

#include "mimocal/estimators.hpp"
#include "mimocal/harness.hpp"
#include "mimocal/sim.hpp"

using namespace mimocal;

namespace {

TargetScene scene() {
  return TargetScene({{deg_to_rad(10.0), 1.0, 0.10},
                      {deg_to_rad(20.0), 1.0, 0.22},
                      {deg_to_rad(30.0), 1.0, 0.34}});
}

ComplexMatrix snapshots(int m) {
  return generate_snapshots(scene(), GainPhase::identity(m), ArrayConfig::uniform(m), 100,
                            NoiseSpec::from_snr_db(10.0), 1)
      .data;
}

void BM_covariance_serial(benchmark::State& st) {
  const ComplexMatrix x = snapshots(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(sample_covariance_serial(x));
}

void BM_covariance_omp(benchmark::State& st) {
  const ComplexMatrix x = snapshots(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(sample_covariance(x));
}

template <bool Parallel>
void BM_music(benchmark::State& st) {
  const ArrayConfig cfg = ArrayConfig::uniform(10);
  const SubspaceDecomp d = subspace(sample_covariance(snapshots(10)), 3);
  const auto provider = nominal_provider(cfg);
  const auto grid = default_music_grid();
  for (auto _ : st) {
    if constexpr (Parallel) benchmark::DoNotOptimize(music_spectrum(d, provider, grid));
    else benchmark::DoNotOptimize(music_spectrum_serial(d, provider, grid));
  }
}

harness::ExperimentConfig batch() {
  harness::ExperimentConfig c;
  c.name = "bench";
  c.snr_grid_db = {10.0};
  c.runs = 16;
  c.estimators = {harness::EstimatorKind::esprit_proposed, harness::EstimatorKind::joint};
  return c;
}

void BM_montecarlo_serial(benchmark::State& st) {
  const auto c = batch();
  for (auto _ : st) benchmark::DoNotOptimize(harness::run_experiment_serial(c));
}

void BM_montecarlo_omp(benchmark::State& st) {
  const auto c = batch();
  for (auto _ : st) benchmark::DoNotOptimize(harness::run_experiment(c, {static_cast<int>(st.range(0))}));
}

}  // namespace

BENCHMARK(BM_covariance_serial)->Arg(6)->Arg(10)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_covariance_omp)->Arg(6)->Arg(10)->Arg(16)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_music<false>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_music<true>)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_montecarlo_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_montecarlo_omp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
