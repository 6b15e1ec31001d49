#include <benchmark/benchmark.h>

#include "exmap/harness.hpp"

namespace {

void BM_TestValidityReplication(benchmark::State& state) {
  exmap::RunSpec spec;
  spec.command = exmap::Command::TestValidity;
  spec.resolve_defaults();
  const int n = static_cast<int>(state.range(0));
  int rep = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(exmap::run_replication(spec, exmap::Setting::S1, n, rep++));
}
BENCHMARK(BM_TestValidityReplication)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_DirectEffectReplication(benchmark::State& state) {
  exmap::RunSpec spec;
  spec.command = exmap::Command::EstimateDirect;
  spec.resolve_defaults();
  int rep = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        exmap::run_replication(spec, exmap::Setting::Direct, static_cast<int>(state.range(0)), rep++));
}
BENCHMARK(BM_DirectEffectReplication)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
