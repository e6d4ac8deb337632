#include <benchmark/benchmark.h>

#include <memory>

#include "pathclosure/geometry.hpp"

using namespace pathclosure;

static void McGeometryOscillator(benchmark::State& state) {
  auto model = std::make_shared<models::OscillatorModel>();
  geometry::McOptions opt;
  opt.count = static_cast<int>(state.range(0));
  opt.seed = 7;
  geometry::MonteCarloProvider provider(model, opt, 1.0);
  Vector l(2);
  l << 1.0, 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(provider.at(l));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(McGeometryOscillator)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Complexity();

static void McGeometryTbh(benchmark::State& state) {
  auto model = std::make_shared<models::TbhModel>(static_cast<int>(state.range(0)), 1);
  geometry::McOptions opt;
  opt.count = 20000;
  opt.seed = 7;
  geometry::MonteCarloProvider provider(model, opt, 1.0);
  Vector l(2);
  l << 0.5, 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(provider.at(l));
  }
}
BENCHMARK(McGeometryTbh)->DenseRange(2, 8, 2);

static void TbhIsserlisOracle(benchmark::State& state) {
  auto model = std::make_shared<models::TbhModel>(static_cast<int>(state.range(0)), 1);
  geometry::TbhGaussianProvider provider(model, 1.0);
  Vector l(2);
  l << 0.5, 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(provider.at(l));
  }
}
BENCHMARK(TbhIsserlisOracle)->DenseRange(2, 16, 2);
