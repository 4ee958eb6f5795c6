#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "hyfsi/fluid.hpp"

namespace {

void BM_FluidAssembly(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const bool with_matrix = state.range(1) != 0;
  const auto mesh = hyfsi::generate_structured_rect({0, 0}, {1, 1}, n, n);
  hyfsi::DofMap dofs;
  dofs.add_block(hyfsi::Field::Background, mesh.num_nodes(), 3);
  std::vector<double> u(2 * mesh.num_nodes()), p(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const auto& x = mesh.nodes[i];
    u[2 * i] = std::sin(M_PI * x.x()) * std::sin(M_PI * x.y());
    u[2 * i + 1] = std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
    p[i] = x.x() - x.y();
  }
  hyfsi::FluidView view;
  view.mesh = &mesh;
  view.coords = mesh.nodes;
  view.field = hyfsi::Field::Background;
  view.dofs = &dofs;
  view.u = u;
  view.p = p;
  view.u_lin = u;
  const auto ts = hyfsi::FluidTimeScheme::transient(0.01, 0.5);
  const hyfsi::BodyForce body = [](const hyfsi::Vec2&) { return hyfsi::Vec2::Zero(); };
  for (auto _ : state) {
    hyfsi::Accumulator acc(dofs.size(), with_matrix);
    hyfsi::assemble_fluid_domain(view, hyfsi::FluidParams{}, ts, body, acc);
    auto r = acc.residual();
    benchmark::DoNotOptimize(r);
    if (with_matrix) {
      auto K = acc.matrix();
      benchmark::DoNotOptimize(K);
    }
  }
  state.SetItemsProcessed(state.iterations() * mesh.num_elements());
}
BENCHMARK(BM_FluidAssembly)->ArgsProduct({{16, 32, 64}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
