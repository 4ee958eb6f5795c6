#include <gtest/gtest.h>

#include <cmath>

#include "hyfsi/fluid.hpp"

namespace hyfsi {
namespace {

struct FluidFixture {
  QuadMesh mesh;
  DofMap dofs;
  std::vector<double> u, p;

  FluidFixture(const Vec2& origin, const Vec2& extent, int nx, int ny)
      : mesh(generate_structured_rect(origin, extent, nx, ny)) {
    dofs.add_block(Field::Background, mesh.num_nodes(), 3);
    u.assign(2 * mesh.num_nodes(), 0.0);
    p.assign(mesh.num_nodes(), 0.0);
  }
  template <class U, class P>
  void set(U uf, P pf) {
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      const Vec2 v = uf(mesh.nodes[n]);
      u[2 * n] = v.x();
      u[2 * n + 1] = v.y();
      p[n] = pf(mesh.nodes[n]);
    }
  }
  FluidView view() const {
    FluidView v;
    v.mesh = &mesh;
    v.coords = mesh.nodes;
    v.field = Field::Background;
    v.dofs = &dofs;
    v.u = u;
    v.p = p;
    v.u_lin = u;
    return v;
  }
  bool interior(int n) const {
    const Vec2& x = mesh.nodes[n];
    const Vec2 lo = mesh.nodes.front(), hi = mesh.nodes.back();
    return x.x() > lo.x() + 1e-12 && x.x() < hi.x() - 1e-12 && x.y() > lo.y() + 1e-12 && x.y() < hi.y() - 1e-12;
  }
};

Metric unit_metric(double h) {
  const Corners q{Vec2(0, 0), Vec2(h, 0), Vec2(h, h), Vec2(0, h)};
  return metric_quantities(eval_basis(q, Vec2::Zero()));
}

TEST(Tau, HandEvaluation) {
  const FluidParams fp;
  const double tm = tau_M(fp, 1.0, Vec2::Zero(), unit_metric(1.0));
  EXPECT_NEAR(tm, 1.0 / 34.0, 1e-15);
  EXPECT_NEAR(tau_C(tm, 8.0), 4.25, 1e-13);
  EXPECT_DOUBLE_EQ(tau_C(1.0, 1.0), 1.0);
}

TEST(Tau, SteadyLimit) {
  const FluidParams fp;
  const Metric m = unit_metric(0.5);
  const double expected = 1.0 / std::sqrt(fp.C_I * fp.mu * fp.mu * m.GG);
  EXPECT_NEAR(tau_M(fp, std::numeric_limits<double>::infinity(), Vec2::Zero(), m), expected, 1e-15);
  EXPECT_NEAR(tau_M(fp, 1e12, Vec2::Zero(), m), expected, 1e-12 * expected);
}

TEST(Tau, ScalesInverselyWithDensityAndViscosity) {
  FluidParams a;
  a.rho = 1.3;
  a.mu = 0.2;
  FluidParams b = a;
  b.rho *= 5.0;
  b.mu *= 5.0;
  const Metric m = unit_metric(0.7);
  const Vec2 c(0.4, -1.1);
  EXPECT_NEAR(tau_M(b, 0.01, c, m), tau_M(a, 0.01, c, m) / 5.0, 1e-14);
}

TEST(Tau, DecreasesWithConvection) {
  const FluidParams fp;
  const Metric m = unit_metric(0.1);
  EXPECT_LT(tau_M(fp, 0.1, Vec2(10, 0), m), tau_M(fp, 0.1, Vec2(1, 0), m));
}

TEST(FluidDomain, RigidTranslationHasZeroResidual) {
  FluidFixture f({0, 0}, {1, 1}, 4, 4);
  f.set([](const Vec2&) { return Vec2(0.7, -0.3); }, [](const Vec2&) { return 0.0; });
  Accumulator acc(f.dofs.size(), false);
  assemble_fluid_domain(f.view(), FluidParams{}, FluidTimeScheme{}, nullptr, acc);
  EXPECT_LT(acc.residual().norm(), 1e-13);
}

TEST(FluidDomain, SolenoidalFieldSatisfiesContinuityRows) {
  FluidFixture f({0, 0}, {1, 1}, 5, 3);
  f.set([](const Vec2& x) { return Vec2(x.x(), -x.y()); }, [](const Vec2&) { return 0.0; });
  Accumulator acc(f.dofs.size(), false);
  assemble_fluid_domain(f.view(), FluidParams{}, FluidTimeScheme{}, nullptr, acc, {true, false});
  const Vector r = acc.residual();
  for (int n = 0; n < f.mesh.num_nodes(); ++n) EXPECT_NEAR(r[f.dofs.dof(Field::Background, n, 2)], 0.0, 1e-14);
}

TEST(FluidDomain, CouetteInteriorResidualVanishes) {
  FluidFixture f({0, 0}, {2, 1}, 8, 4);
  f.set([](const Vec2& x) { return Vec2(x.y(), 0.0); }, [](const Vec2&) { return 0.0; });
  FluidParams fp;
  fp.mu = 0.1;
  Accumulator acc(f.dofs.size(), false);
  assemble_fluid_domain(f.view(), fp, FluidTimeScheme{}, nullptr, acc);
  const Vector r = acc.residual();
  for (int n = 0; n < f.mesh.num_nodes(); ++n) {
    if (!f.interior(n)) continue;
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(r[f.dofs.dof(Field::Background, n, c)], 0.0, 1e-14);
  }
}

TEST(FluidDomain, ZeroStateGivesZero) {
  FluidFixture f({0, 0}, {1, 1}, 3, 3);
  Accumulator acc(f.dofs.size(), false);
  assemble_fluid_domain(f.view(), FluidParams{}, FluidTimeScheme::transient(0.1, 0.5), nullptr, acc);
  EXPECT_EQ(acc.residual().norm(), 0.0);
}

TEST(FluidDomain, PressureStabilizationBlockIsSymmetric) {
  FluidFixture f({0, 0}, {1, 1}, 4, 4);
  f.set([](const Vec2&) { return Vec2::Zero(); }, [](const Vec2& x) { return x.x(); });
  Accumulator acc(f.dofs.size(), true);
  assemble_fluid_domain(f.view(), FluidParams{}, FluidTimeScheme{}, nullptr, acc);
  const Eigen::MatrixXd K = acc.matrix();
  const int n = f.mesh.num_nodes();
  Eigen::MatrixXd Kpp(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) Kpp(a, b) = K(3 * a + 2, 3 * b + 2);
  EXPECT_GT(Kpp.norm(), 0.0);
  EXPECT_LT((Kpp - Kpp.transpose()).norm(), 1e-14 * Kpp.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Kpp);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(FluidDomain, TangentMatchesFiniteDifferences) {
  FluidFixture f({0, 0}, {1, 0.8}, 3, 2);
  f.set([](const Vec2& x) { return Vec2(std::sin(x.y() * 2) + 0.3, x.x() * x.y()); },
        [](const Vec2& x) { return x.x() - 2 * x.y() * x.y(); });
  FluidParams fp;
  fp.mu = 0.05;
  const auto ts = FluidTimeScheme::transient(0.1, 0.6);
  const std::vector<double> lin = f.u;
  auto residual = [&](const FluidFixture& g) {
    auto v = g.view();
    v.u_lin = lin;
    Accumulator acc(g.dofs.size(), false);
    assemble_fluid_domain(v, fp, ts, nullptr, acc);
    return acc.residual();
  };
  auto v = f.view();
  Accumulator acc(f.dofs.size(), true);
  assemble_fluid_domain(v, fp, ts, nullptr, acc);
  const Eigen::MatrixXd K = acc.matrix();
  const double eps = 1e-6;
  double worst = 0.0;
  for (int n = 0; n < f.mesh.num_nodes(); ++n) {
    for (int c = 0; c < 3; ++c) {
      FluidFixture plus = f, minus = f;
      (c < 2 ? plus.u[2 * n + c] : plus.p[n]) += eps;
      (c < 2 ? minus.u[2 * n + c] : minus.p[n]) -= eps;
      const Vector col = (residual(plus) - residual(minus)) / (2 * eps);
      worst = std::max(worst, (col - K.col(3 * n + c)).cwiseAbs().maxCoeff());
    }
  }
  EXPECT_LT(worst, 1e-7);
}

TEST(FluidDomain, VoidElementsAreSkipped) {
  FluidFixture f({0, 0}, {2, 2}, 2, 2);
  CutState cut;
  cut.kind = {CellKind::Void, CellKind::Active, CellKind::Active, CellKind::Active};
  cut.volume_quadrature.assign(4, {});
  f.set([](const Vec2& x) { return Vec2(x.y() * x.y(), 0.0); }, [](const Vec2&) { return 0.0; });
  auto v = f.view();
  v.cut = &cut;
  EXPECT_TRUE(fluid_element_quadrature(v, 0).empty());
  EXPECT_EQ(fluid_element_quadrature(v, 1).size(), 4u);
}

// Two unit elements side by side; only the viscous ghost-penalty part is
// switched on.
struct GhostFixture : FluidFixture {
  CutState cut;
  GhostFixture() : FluidFixture({0, 0}, {2, 1}, 2, 1) {
    cut.kind = {CellKind::Cut, CellKind::Cut};
    cut.gp_facets = {0};
  }
  double energy(const FluidParams& fp) const {
    auto v = view();
    v.u_lin = {};
    v.cut = &cut;
    Accumulator acc(dofs.size(), true);
    assemble_ghost_penalty(v, fp, FluidTimeScheme{}, acc);
    Vector x = Vector::Zero(dofs.size());
    for (int n = 0; n < mesh.num_nodes(); ++n) {
      x[3 * n] = u[2 * n];
      x[3 * n + 1] = u[2 * n + 1];
      x[3 * n + 2] = p[n];
    }
    return x.dot(acc.matrix() * x);
  }
};

TEST(GhostPenalty, LinearFieldGivesZero) {
  GhostFixture g;
  g.set([](const Vec2& x) { return Vec2(2 * x.x() - x.y(), 0.5 * x.y()); }, [](const Vec2& x) { return x.x(); });
  EXPECT_NEAR(g.energy(FluidParams{}), 0.0, 1e-15);
}

TEST(GhostPenalty, SingleFacetEnergy) {
  GhostFixture g;
  g.set([](const Vec2& x) { return Vec2(std::max(0.0, x.x() - 1.0), 0.0); }, [](const Vec2&) { return 0.0; });
  FluidParams fp;
  fp.gamma_c = 1.0;
  fp.gamma_u = 0.0;
  fp.gamma_p = 0.0;
  const double h_F = std::sqrt(2.0);  // element diameter
  EXPECT_NEAR(g.energy(fp), h_F, 1e-13);
}

TEST(GhostPenalty, RejectsPatchMesh) {
  GhostFixture g;
  auto v = g.view();
  v.field = Field::Patch;
  v.cut = &g.cut;
  Accumulator acc(g.dofs.size(), false);
  EXPECT_THROW(assemble_ghost_penalty(v, FluidParams{}, FluidTimeScheme{}, acc), AssemblyError);
}

}  // namespace
}  // namespace hyfsi
