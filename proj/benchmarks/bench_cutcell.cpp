#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "hyfsi/cutcell.hpp"
#include "hyfsi/mesh.hpp"

namespace {

std::vector<hyfsi::Vec2> circle(const hyfsi::Vec2& c, double r, int n) {
  std::vector<hyfsi::Vec2> pts;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * M_PI * k / n;
    pts.push_back(c + r * hyfsi::Vec2(std::cos(a), std::sin(a)));
  }
  return pts;
}

void BM_ClassifyAndCut(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto mesh = hyfsi::generate_structured_rect({0, 0}, {1, 1}, n, n);
  const auto cutter = circle({0.5, 0.5}, 0.3, 64);
  for (auto _ : state) {
    auto cut = hyfsi::classify_and_cut(mesh, cutter);
    benchmark::DoNotOptimize(cut);
  }
  state.SetComplexityN(n * n);
}
BENCHMARK(BM_ClassifyAndCut)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void BM_InterfaceSegments(benchmark::State& state) {
  const auto mesh = hyfsi::generate_structured_rect({0, 0}, {1, 1}, 64, 64);
  const auto cutter = circle({0.5, 0.5}, 0.3, 64);
  for (auto _ : state) {
    auto segs = hyfsi::interface_segments(mesh, cutter, 3);
    benchmark::DoNotOptimize(segs);
  }
}
BENCHMARK(BM_InterfaceSegments);

}  // namespace
