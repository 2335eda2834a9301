#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "sphtomo/analysis.hpp"
#include "sphtomo/spin_state.hpp"
#include "sphtomo/tomography.hpp"

namespace {

using namespace sphtomo;

void BM_TauTable(benchmark::State& state) {
  const int two_j = static_cast<int>(state.range(0));
  const int kmax = static_cast<int>(state.range(1));
  for (auto _ : state) {
    TauTable t(two_j, kmax);
    benchmark::DoNotOptimize(t(kmax, 0));
  }
  state.SetItemsProcessed(state.iterations() * (kmax + 1) * (two_j + 1));
}
BENCHMARK(BM_TauTable)->Args({40, 40})->Args({1260, 200})->Args({1260, 1260})->Unit(benchmark::kMillisecond);

std::vector<MeasurementRecord> inplane_records(int axes, int shots) {
  auto rec = sample_measurements(coherent_state(40, 1.5, 0.2, 0.0, 40), in_plane_axes(axes), shots, {}, 1);
  compute_weights(rec, ReconstructionMode::in_plane);
  return rec;
}

void BM_FbpInplane(benchmark::State& state) {
  const auto rec = inplane_records(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  ReconstructionConfig cfg;
  cfg.mode = ReconstructionMode::in_plane;
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(rec, cfg).state.kmax());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rec.size()));
}
BENCHMARK(BM_FbpInplane)->Args({24, 400})->Args({40, 2000})->Unit(benchmark::kMillisecond);

void BM_FbpFull(benchmark::State& state) {
  auto rec = sample_measurements(coherent_state(40, 0.8, 0.2, 0.0, 40), hemisphere_axes(200), 50, {}, 2);
  compute_weights(rec, ReconstructionMode::full_sphere);
  ReconstructionConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(rec, cfg).state.kmax());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rec.size()));
}
BENCHMARK(BM_FbpFull)->Unit(benchmark::kMillisecond);

void BM_WignerGrid(benchmark::State& state) {
  const auto s = oat_squeezed_state(static_cast<int>(state.range(0)), 0.02, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(wigner_grid(s, 64, 128).values().data());
}
BENCHMARK(BM_WignerGrid)->Arg(40)->Arg(120)->Unit(benchmark::kMillisecond);

void BM_SqueezingScan(benchmark::State& state) {
  const auto s = oat_squeezed_state(60, 0.02, 60);
  const auto phis = scan_azimuths(180);
  for (auto _ : state) benchmark::DoNotOptimize(squeezing_scan(s, phis, 0.0, 30.0).phi_s);
}
BENCHMARK(BM_SqueezingScan)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
