#include <benchmark/benchmark.h>

#include "pathclosure/paths.hpp"

using namespace pathclosure;

static void ExtremalSolve(benchmark::State& state) {
  geometry::HarmonicSurrogateProvider h(1.0);
  lagrangian::LagrangianContext ctx{&h, 1.0, 1.0};
  Vector l0(1), lT(1);
  l0 << 1.0;
  lT << 0.5;
  const int nodes = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(paths::solve_extremal(ctx, l0, lT, 1.0, nodes));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(ExtremalSolve)->RangeMultiplier(2)->Range(256, 2048)->Complexity();

static void DiscreteAction(benchmark::State& state) {
  geometry::HarmonicSurrogateProvider h(1.0);
  lagrangian::LagrangianContext ctx{&h, 1.0, 1.0};
  const int nodes = static_cast<int>(state.range(0));
  Path p;
  p.times = Vector::LinSpaced(nodes, 0.0, 1.0);
  p.points = Matrix(nodes, 1);
  for (int k = 0; k < nodes; ++k) p.points(k, 0) = std::cos(p.times[k]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lagrangian::discrete_action(ctx, p));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(DiscreteAction)->RangeMultiplier(4)->Range(256, 4096)->Complexity();
