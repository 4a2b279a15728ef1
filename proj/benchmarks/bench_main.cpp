#include <benchmark/benchmark.h>

#include <sstream>

#include "popnet/gibbs.hpp"
#include "popnet/graphgen.hpp"
#include "popnet/netstats.hpp"
#include "popnet/randdists.hpp"

using namespace popnet;

namespace {

NetworkDataset study_data() {
  std::istringstream in(*bundled_recipe("paper_sec5"));
  auto rf = parse_recipe(KeyValues::parse(in));
  RngStream rng(rf.seed, 0);
  return simulate_population(rf.recipe, rng);
}

void BM_PolyaGamma(benchmark::State& state) {
  RngStream rng(1, 0);
  const int b = static_cast<int>(state.range(0));
  const double c = static_cast<double>(state.range(1)) / 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_polya_gamma(b, c, rng));
}
BENCHMARK(BM_PolyaGamma)->Args({1, 0})->Args({1, 4})->Args({25, 4})->Args({100, 10});

void BM_Sweep(benchmark::State& state) {
  const auto data = study_data();
  ModelConfig cfg;
  cfg.seed = 1;
  const ChainData chain(data);
  ChainStreams streams(cfg.seed, 0, cfg.H, chain.size());
  auto s = init_state(chain, cfg, streams);
  for (int i = 0; i < 50; ++i) sweep(s, chain, streams, false);
  StepTimings timings;
  for (auto _ : state) sweep(s, chain, streams, false, &timings);
  const char* names[StepTimings::kSteps] = {"allocate", "nu", "pg", "z", "rows", "theta", "pi"};
  for (int k = 0; k < StepTimings::kSteps; ++k) {
    state.counters[names[k]] = benchmark::Counter(timings.seconds[k] / static_cast<double>(state.iterations()));
  }
}
BENCHMARK(BM_Sweep)->Unit(benchmark::kMillisecond);

void BM_TopologySummary(benchmark::State& state) {
  const auto data = study_data();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(topology_summary(data[i]));
    i = (i + 1) % data.size();
  }
}
BENCHMARK(BM_TopologySummary);

void BM_Betweenness(benchmark::State& state) {
  const auto data = study_data();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(betweenness(data[i]));
    i = (i + 1) % data.size();
  }
}
BENCHMARK(BM_Betweenness);

}  // namespace

BENCHMARK_MAIN();
