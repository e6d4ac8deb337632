#include <benchmark/benchmark.h>

#include "pathclosure/transfer.hpp"

using namespace pathclosure;

static void TransferBuild(benchmark::State& state) {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(transfer::build_transfer(h, grid, 1.0, 20, 1.0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(TransferBuild)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

static void TransferStep(benchmark::State& state) {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, static_cast<int>(state.range(0)));
  const auto op = transfer::build_transfer(h, grid, 1.0, 20, 1.0);
  Vector start(1);
  start << 1.0;
  auto psi = transfer::ConsistencyField::delta(grid, start);
  for (auto _ : state) {
    psi.values = op.apply(psi.values);
    benchmark::DoNotOptimize(psi.values.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(TransferStep)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

static void SteadyState(benchmark::State& state) {
  geometry::HarmonicSurrogateProvider h(1.0);
  const GridSpec grid = make_grid_1d(-4.0, 4.0, 401);
  const auto op = transfer::build_transfer(h, grid, 1.0, 20, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(transfer::steady_state(op, 1e-10, 400, 3));
  }
}
BENCHMARK(SteadyState);
