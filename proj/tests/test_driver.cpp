#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "hyfsi/driver.hpp"
#include "hyfsi/verify.hpp"

namespace hyfsi {
namespace {

TEST(TimeCurve, Laws) {
  TimeCurve ramp{TimeCurve::Kind::SinRamp, 0.0, 1.0, 3.14159265358979323846, 0.0, 5.0};
  EXPECT_NEAR(ramp(0.0), 0.0, 1e-15);
  EXPECT_NEAR(ramp(1.0), 1.0, 1e-15);
  EXPECT_NEAR(ramp(5.0), 1.0, 1e-15);
  EXPECT_NEAR(ramp(7.3), 1.0, 1e-15);
  TimeCurve sine{TimeCurve::Kind::Sine, 0.8, 0.8, 2.0 * 3.14159265358979323846 / 3.0, 0.75};
  EXPECT_NEAR(sine(0.0), 0.0, 1e-15);
  EXPECT_NEAR(sine(1.5), 1.6, 1e-15);
  EXPECT_EQ(TimeCurve{}(12.0), 1.0);
}

TEST(Mode, StringRoundTrip) {
  for (Mode m : {Mode::Hybrid, Mode::FixedGrid, Mode::SingleMesh}) EXPECT_EQ(mode_from_string(to_string(m)), m);
  EXPECT_THROW(mode_from_string("overset"), ConfigError);
}

TEST(TimeScheme, Sigma) {
  EXPECT_DOUBLE_EQ(FluidTimeScheme::transient(0.01, 1.0).sigma(), 100.0);
  EXPECT_DOUBLE_EQ(FluidTimeScheme::transient(0.01, 0.5).history_factor(), 1.0);
  EXPECT_EQ(FluidTimeScheme{}.sigma(), 0.0);
}

TEST(Problem, ValidationRejectsBadInput) {
  auto p = fixtures::small_hybrid();
  p.time.dt = 0.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p = fixtures::small_hybrid();
  p.time.theta = 1.5;
  EXPECT_THROW(p.validate(), ConfigError);
  p = fixtures::small_hybrid();
  p.bcs.back().tag = "nowhere";
  EXPECT_THROW(Solver{p}, ConfigError);
}

TEST(Solver, ZeroBlocksBetweenBackgroundAndSolid) {
  Solver s(fixtures::small_hybrid());
  auto st = s.initial_state();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.01, 0.01);
  for (auto* v : {&st.background.u, &st.patch.u, &st.d}) for (auto& x : *v) x = u(rng);
  const auto geo = s.geometry(st.d);
  const auto A = s.assemble(geo, st, st, s.initial_state(), 0.05, true);
  int offending = 0;
  for (int k = 0; k < A.jacobian.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A.jacobian, k); it; ++it) {
      const Field r = geo.dofs.field_of(it.row()), c = geo.dofs.field_of(it.col());
      if ((r == Field::Background && c == Field::Solid) || (r == Field::Solid && c == Field::Background)) ++offending;
    }
  }
  EXPECT_EQ(offending, 0);
}

TEST(Solver, RestIsPreserved) {
  auto p = fixtures::small_hybrid();
  p.bcs.erase(p.bcs.begin());  // no inflow
  Solver s(std::move(p));
  auto st = s.initial_state();
  const auto rep = s.advance(st);
  EXPECT_EQ(rep.cycles, 1);
  for (const auto* v : {&st.background.u, &st.background.p, &st.patch.u, &st.d, &st.v, &st.a})
    for (double x : *v) EXPECT_EQ(x, 0.0);
}

TEST(Solver, EquilibriumStateHasSmallResidual) {
  Solver s(fixtures::couette(true));
  auto st = s.initial_state();
  s.advance(st);
  const auto geo = s.geometry(st.d);
  const auto A = s.assemble(geo, st, st, st, st.t, false);
  EXPECT_LT(A.residual.lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Solver, NewtonConvergesQuadraticallyOnCouette) {
  auto p = fixtures::couette(true);
  p.fluid.mu = 0.01;  // convection matters
  Solver s(std::move(p));
  auto st = s.initial_state();
  const auto rep = s.advance(st);
  const auto& h = rep.residual_history;
  ASSERT_GE(h.size(), 3u);
  for (std::size_t k = 2; k + 1 < h.size(); ++k) {
    if (h[k + 1] < 1e-11) break;
    EXPECT_LT(h[k + 1], 1e-2 * h[k]) << k;
  }
  EXPECT_LT(h.back(), 1e-8 * h.front());
}

TEST(Solver, GeneralizedAlphaIdentitiesHoldAfterStep) {
  Solver s(fixtures::small_hybrid());
  auto st = s.initial_state();
  s.advance(st);
  const auto prev = st;
  s.advance(st);
  const auto ga = s.solid_scheme().ga;
  const double dt = s.problem().time.dt;
  for (std::size_t i = 0; i < st.d.size(); ++i) {
    const double pred = prev.d[i] + dt * prev.v[i] + dt * dt * ((0.5 - ga.beta) * prev.a[i] + ga.beta * st.a[i]);
    EXPECT_NEAR(st.d[i], pred, 1e-12);
    EXPECT_NEAR(st.v[i], prev.v[i] + dt * ((1 - ga.gamma) * prev.a[i] + ga.gamma * st.a[i]), 1e-12);
  }
}

TEST(Solver, FluidAccelerationFollowsOneStepTheta) {
  Solver s(fixtures::small_hybrid());
  auto st = s.initial_state();
  s.advance(st);
  const auto prev = st;
  s.advance(st);
  const auto fts = s.fluid_scheme();
  for (std::size_t i = 0; i < st.patch.u.size(); ++i) {
    const double a = (st.patch.u[i] - prev.patch.u[i]) * fts.sigma() - fts.history_factor() * prev.patch.a[i];
    EXPECT_NEAR(st.patch.a[i], a, 1e-10 * (1.0 + std::abs(a)));
  }
}

TEST(Solver, ArchivedInterfaceForceMatchesRecomputation) {
  Solver s(fixtures::small_hybrid());
  auto st = s.initial_state();
  s.advance(st);
  const auto prev = st;
  s.advance(st);
  const auto geo = s.geometry(st.d);
  FieldState hist = prev;
  s.transcribe(geo, hist.background, true);
  const auto A = s.assemble(geo, st, st, hist, st.t, false);
  ASSERT_EQ(static_cast<std::size_t>(A.c_sf2.size()), st.c_sf2.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < st.c_sf2.size(); ++i) worst = std::max(worst, std::abs(A.c_sf2[i] - st.c_sf2[i]));
  EXPECT_LT(worst, 1e-12);
  const auto B = s.assemble(geo, st, st, hist, st.t, false);
  EXPECT_EQ(std::memcmp(A.c_sf2.data(), B.c_sf2.data(), sizeof(double) * A.c_sf2.size()), 0);
}

TEST(Solver, FirstStepFromRestHasZeroArchivedForce) {
  Solver s(fixtures::small_hybrid());
  const auto st = s.initial_state();
  for (double x : st.c_sf2) EXPECT_EQ(x, 0.0);
}

TEST(Solver, DragMatchesWeakTractionIntegral) {
  Solver s(fixtures::fixed_cylinder(0));
  auto st = s.initial_state();
  const auto rep = s.advance(st);
  const auto geo = s.geometry(st.d);
  const auto& pr = s.problem();
  const auto& mesh = *pr.patch;
  const double mu = pr.fluid.mu;
  FluidView view;
  view.mesh = &mesh;
  view.coords = geo.patch_coords;
  view.field = Field::Patch;
  view.dofs = &geo.dofs;
  view.u = st.patch.u;
  view.p = st.patch.p;
  view.u_lin = st.patch.u;
  const auto ts = s.fluid_scheme();
  Vec2 direct = Vec2::Zero();
  for (const auto& pt : geo.fs) {
    const auto q = mesh.corners(pt.fluid_element, geo.patch_coords);
    const auto xi = map_to_reference(q, pt.x);
    ASSERT_TRUE(xi.has_value());
    const auto B = eval_basis(q, *xi);
    Mat2 gu = Mat2::Zero();
    Vec2 u = Vec2::Zero();
    double p = 0.0;
    for (int a = 0; a < 4; ++a) {
      const int n = mesh.elements[pt.fluid_element][a];
      const Vec2 un(st.patch.u[2 * n], st.patch.u[2 * n + 1]);
      gu += un * B.dN[a].transpose();
      u += B.N[a] * un;
      p += B.N[a] * st.patch.p[n];
    }
    // The solid is at rest, so u is the slip. n points from the fluid into
    // the solid, so the load on the solid is -sigma n plus the penalty pull.
    const double phi = element_scaling(view, pt.fluid_element, pr.fluid, ts).phi;
    const double pen_v = pr.coupling.gamma * mu / pt.h;
    const double pen_m = pr.coupling.gamma * pr.fluid.rho * std::pow(phi, pr.coupling.mass_penalty_exponent) / pt.h;
    const Vec2 sigma_n = mu * (gu + gu.transpose()) * pt.n - p * pt.n;
    direct += pt.w * (-sigma_n + pen_v * u + pen_m * u.dot(pt.n) * pt.n);
  }
  ASSERT_GT(direct.norm(), 0.0);
  EXPECT_LT((rep.interface_force - direct).norm(), 1e-8 * direct.norm());
}

TEST(Transcription, MatchesBruteForceNearestNode) {
  Solver s(fixtures::couette(true));
  const auto geo = s.geometry({});
  const auto& nodes = s.problem().background->nodes;
  const int n = static_cast<int>(nodes.size());
  FluidFields f;
  f.u.assign(2 * n, 0.0);
  f.a.assign(2 * n, 0.0);
  f.p.assign(n, 0.0);
  f.valued.assign(n, 0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    if (u(rng) < 0.3) {
      f.valued[i] = 1;
      f.u[2 * i] = i;
      f.u[2 * i + 1] = -i;
      f.a[2 * i] = 0.5 * i;
      f.p[i] = 2.0 * i;
    }
  }
  const FluidFields before = f;
  s.transcribe(geo, f, true);
  const auto active = geo.background_active();
  for (int i = 0; i < n; ++i) {
    if (!active[i]) continue;
    if (before.valued[i]) {
      EXPECT_EQ(f.p[i], before.p[i]);
      continue;
    }
    int best = -1;
    double bd = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!before.valued[j]) continue;
      const double d = (nodes[j] - nodes[i]).norm();
      if (best < 0 || d < bd || (d == bd && j < best)) {
        best = j;
        bd = d;
      }
    }
    EXPECT_EQ(f.p[i], before.p[best]) << i;
    EXPECT_EQ(f.u[2 * i], before.u[2 * best]);
    EXPECT_EQ(f.a[2 * i], before.a[2 * best]);
  }
  EXPECT_EQ(f.valued, active);
}

TEST(Transcription, IdenticalActiveSetIsIdentity) {
  Solver s(fixtures::couette(true));
  const auto geo = s.geometry({});
  auto st = s.initial_state();
  for (std::size_t i = 0; i < st.background.p.size(); ++i) st.background.p[i] = 0.1 * i;
  const auto before = st.background;
  s.transcribe(geo, st.background, true);
  EXPECT_EQ(st.background.p, before.p);
  EXPECT_EQ(st.background.u, before.u);
}

// Free solid pulled by a body force: the patch moves far enough within one
// step to expose background nodes the predictor did not anticipate.
Problem falling_disc() {
  auto p = fixtures::small_hybrid();
  p.background = generate_structured_rect(Vec2(0.0, 0.0), Vec2(1.0, 1.0), 10, 10);
  p.patch = generate_annulus_patch(Vec2(0.5, 0.5), 0.15, 0.3, 16, 2, 1.0);
  p.solid = generate_disc_mesh(Vec2(0.5, 0.5), 0.15, 16);
  p.bcs.erase(p.bcs.begin());
  p.bcs.pop_back();
  p.solid_params.body_force = Vec2(0.0, -50.0);
  p.solid_params.E = 2000.0;
  return p;
}

TEST(Solver, NewActiveNodeCostsOneExtraCycle) {
  Solver s(falling_disc());
  auto st = s.initial_state();
  const auto before = s.geometry(st.d).background_active();
  const auto rep = s.advance(st);
  const auto after = s.geometry(st.d).background_active();
  ASSERT_NE(before, after);
  EXPECT_EQ(rep.cycles, 2);
}

TEST(Solver, CycleCapRaisesDivergence) {
  auto p = falling_disc();
  p.newton.max_cycles = 1;
  Solver s(std::move(p));
  auto st = s.initial_state();
  EXPECT_THROW(s.advance(st), NonlinearDivergence);
}

TEST(Solver, StepsAreBitwiseDeterministic) {
  auto run = [] {
    Solver s(fixtures::small_hybrid());
    auto st = s.initial_state();
    for (int k = 0; k < 3; ++k) s.advance(st);
    return st;
  };
  EXPECT_TRUE(run() == run());
}

}  // namespace
}  // namespace hyfsi
