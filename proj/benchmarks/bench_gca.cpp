#include <benchmark/benchmark.h>

#include "exmap/dgp.hpp"
#include "exmap/gca.hpp"

namespace {

void BM_GcaTrain(benchmark::State& state) {
  exmap::SimConfig cfg;
  cfg.n = static_cast<int>(state.range(0));
  cfg.setting = exmap::Setting::S1;
  cfg.seed = 11;
  const exmap::Dataset data = exmap::draw_population(cfg);

  exmap::GcaConfig gca;
  gca.epochs = static_cast<int>(state.range(1));
  gca.seed = 3;
  for (auto _ : state)
    benchmark::DoNotOptimize(exmap::train_gca(data.graph, data.d, data.x, data.y, gca));
}
BENCHMARK(BM_GcaTrain)->Args({500, 200})->Args({2000, 200})->Unit(benchmark::kMillisecond);

}  // namespace
