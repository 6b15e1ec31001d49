#include <benchmark/benchmark.h>

#include "exmap/graph.hpp"

namespace {

void BM_RggGenerate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    exmap::Rng rng(seed++);
    benchmark::DoNotOptimize(exmap::rgg_generate(n, 30.0, rng));
  }
}
BENCHMARK(BM_RggGenerate)->Arg(500)->Arg(2000);

void BM_NormalizedAdjacency(benchmark::State& state) {
  exmap::Rng rng(7);
  const exmap::Graph g = exmap::rgg_generate(static_cast<int>(state.range(0)), 30.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(exmap::normalized_adjacency(g));
}
BENCHMARK(BM_NormalizedAdjacency)->Arg(2000);

void BM_SparseAggregate(benchmark::State& state) {
  exmap::Rng rng(7);
  const exmap::Graph g = exmap::rgg_generate(2000, 30.0, rng);
  const exmap::SparseMatrix adj = exmap::normalized_adjacency(g).normalized;
  exmap::RealMatrix h = exmap::glorot_init(2000, 16, rng);
  for (auto _ : state) benchmark::DoNotOptimize(adj.multiply(h));
}
BENCHMARK(BM_SparseAggregate);

}  // namespace
