#include <benchmark/benchmark.h>

#include <random>

#include "csvd/csvd.hpp"

namespace {

using namespace csvd;

ConvexSite hexagon() {
  return init_grid(2, 2, 6).sites[0];
}

void BM_CsdEval(benchmark::State& state) {
  const ConvexSite site = hexagon();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> queries(1024);
  for (auto& q : queries) q = {u(rng), u(rng)};
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(csd_eval(site, queries[i++ & 1023]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_CsdEval);

void BM_Rasterize(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const SiteGrid grid = init_grid(m, m, 6, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize_assignment(grid, 256, 256));
  }
  state.SetItemsProcessed(state.iterations() * 256 * 256);
}
BENCHMARK(BM_Rasterize)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_TotalEnergy(benchmark::State& state) {
  SynthSpec spec;
  spec.rng_seed = 5;
  spec.size = static_cast<int>(state.range(0));
  const EdgePixelSet omega = edges_from_mask(synth_structure(spec).image, true);
  const SiteGrid grid = init_grid(16, 16, 6);
  const EnergyConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(e_total(grid, omega, config));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(omega.size()));
}
BENCHMARK(BM_TotalEnergy)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
