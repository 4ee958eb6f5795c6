#include <benchmark/benchmark.h>
#include <spdlog/spdlog.h>

#include "hyfsi/driver.hpp"
#include "hyfsi/verify.hpp"

namespace {

void BM_SmallHybridStep(benchmark::State& state) {
  spdlog::set_level(spdlog::level::warn);
  hyfsi::Solver solver(hyfsi::fixtures::small_hybrid());
  const auto start = solver.initial_state();
  for (auto _ : state) {
    auto st = start;
    auto rep = solver.advance(st);
    benchmark::DoNotOptimize(rep);
  }
}
BENCHMARK(BM_SmallHybridStep)->Unit(benchmark::kMillisecond);

void BM_Geometry(benchmark::State& state) {
  hyfsi::Solver solver(hyfsi::fixtures::fixed_cylinder(1));
  for (auto _ : state) {
    auto geo = solver.geometry({});
    benchmark::DoNotOptimize(geo);
  }
}
BENCHMARK(BM_Geometry)->Unit(benchmark::kMillisecond);

}  // namespace
