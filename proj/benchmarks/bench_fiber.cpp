#include <benchmark/benchmark.h>

#include "magbloch/bands.hpp"
#include "magbloch/fiber.hpp"

using namespace magbloch;

namespace {

Grid grid_for(long p, long q, int sites_per_cell) {
  return build_grid(make_flux(p, q, Lattice::unit_square()), sites_per_cell * static_cast<int>(q), sites_per_cell);
}

}  // namespace

static void BM_Assemble(benchmark::State& state) {
  const auto grid = grid_for(1, 2, static_cast<int>(state.range(0)));
  const auto V = random_potential(grid.flux.lattice, 1, 2, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(grid, V, {0.3, 0.6}));
  state.counters["dim"] = grid.size();
}
BENCHMARK(BM_Assemble)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_AssembleOblique(benchmark::State& state) {
  const Lattice L(Vec2(1.0, 0.0), Vec2(0.4, 0.9));
  const auto grid = build_grid(make_flux(1, 2, L), 64, 32);
  const auto V = random_potential(L, 1, 2, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(assemble(grid, V, {0.3, 0.6}));
}
BENCHMARK(BM_AssembleOblique)->Unit(benchmark::kMillisecond);

// Lowest 8 eigenpairs, dense versus shift-invert subspace iteration.
static void BM_Eigensolve(benchmark::State& state) {
  const auto grid = grid_for(2, 1, static_cast<int>(state.range(0)));
  const auto H = assemble(grid, random_potential(grid.flux.lattice, 2, 2, 0.5), {0.1, 0.2});
  const SolverOptions opts{.kind = state.range(1) == 0 ? SolverKind::dense : SolverKind::iterative};
  for (auto _ : state) benchmark::DoNotOptimize(eigensolve(H, 8, opts));
  state.SetLabel(state.range(1) == 0 ? "dense" : "iterative");
  state.counters["dim"] = grid.size();
}
BENCHMARK(BM_Eigensolve)
    ->Args({16, 0})
    ->Args({16, 1})
    ->Args({24, 0})
    ->Args({24, 1})
    ->Args({32, 1})
    ->Args({48, 1})
    ->Unit(benchmark::kMillisecond);

static void BM_BandSweep(benchmark::State& state) {
  const auto grid = grid_for(1, 2, 16);
  const auto V = random_potential(grid.flux.lattice, 3, 2, 0.5);
  const SweepOptions opts{.threads = static_cast<int>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(band_sweep(grid, V, {4, 4}, 4, opts));
}
BENCHMARK(BM_BandSweep)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_MAIN();
