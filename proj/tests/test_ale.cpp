#include <gtest/gtest.h>

#include <cmath>

#include "hyfsi/ale.hpp"

namespace hyfsi {
namespace {

struct AnnulusMotion {
  QuadMesh patch = generate_annulus_patch({0.3, 0.2}, 0.75, 1.5, 48, 6, 2.0);
  std::vector<int> inner = patch.tagged_nodes("fsi");
  MeshMotion motion{patch, inner, lame_from_engineering(1.0, 0.3)};

  std::vector<double> prescribed(const std::function<Vec2(const Vec2&)>& f) const {
    std::vector<double> out;
    for (int n : inner) {
      const Vec2 d = f(patch.nodes[n]);
      out.push_back(d.x());
      out.push_back(d.y());
    }
    return out;
  }
};

TEST(MeshMotion, ZeroInputGivesZero) {
  AnnulusMotion m;
  const Vector d = m.motion.solve(m.prescribed([](const Vec2&) { return Vec2::Zero(); }));
  EXPECT_EQ(d.size(), 2 * m.patch.num_nodes());
  EXPECT_EQ(d.norm(), 0.0);
}

TEST(MeshMotion, RigidTranslationIsExact) {
  AnnulusMotion m;
  const Vec2 t(0.13, -0.07);
  const Vector d = m.motion.solve(m.prescribed([&](const Vec2&) { return t; }));
  for (int n = 0; n < m.patch.num_nodes(); ++n) {
    EXPECT_NEAR(d[2 * n], t.x(), 1e-12);
    EXPECT_NEAR(d[2 * n + 1], t.y(), 1e-12);
  }
}

TEST(MeshMotion, PrescribedNodesFollowExactly) {
  AnnulusMotion m;
  const auto pres = m.prescribed([](const Vec2& x) { return Vec2(0.02 * x.y(), -0.01 * x.x()); });
  const Vector d = m.motion.solve(pres);
  for (std::size_t k = 0; k < m.inner.size(); ++k) {
    EXPECT_EQ(d[2 * m.inner[k]], pres[2 * k]);
    EXPECT_EQ(d[2 * m.inner[k] + 1], pres[2 * k + 1]);
  }
}

TEST(MeshMotion, RadialExpansionKeepsPositiveJacobians) {
  AnnulusMotion m;
  const Vec2 c(0.3, 0.2);
  const Vector d = m.motion.solve(m.prescribed([&](const Vec2& x) { return Vec2(0.05 * (x - c)); }));
  const auto coords = displaced_coordinates(m.patch, std::span<const double>(d.data(), d.size()));
  EXPECT_GT(check_mesh_quality(m.patch, coords), 0.0);
}

TEST(MeshMotion, LargeTranslationOfInnerRingDistorts) {
  AnnulusMotion m;
  const Vec2 c(0.3, 0.2);
  EXPECT_THROW(m.motion.solve(m.prescribed([&](const Vec2& x) { return Vec2(-1.2 * (x - c)); })), MeshDistortion);
}

TEST(MeshMotion, NonlinearVariantMatchesLinearForSmallMotion) {
  AnnulusMotion m;
  MeshMotion nl(m.patch, m.inner, lame_from_engineering(1.0, 0.3), true);
  const auto pres = m.prescribed([](const Vec2& x) { return Vec2(1e-6 * x.y(), 2e-6); });
  const Vector a = m.motion.solve(pres), b = nl.solve(pres);
  EXPECT_LT((a - b).norm(), 1e-9 * a.norm());
}

TEST(MeshMotion, ConstraintValidation) {
  const auto patch = generate_annulus_patch({0, 0}, 0.5, 1.0, 8, 1, 1.0);
  EXPECT_THROW(MeshMotion(patch, {}, lame_from_engineering(1.0, 0.3)), ConfigError);
  EXPECT_THROW(MeshMotion(patch, {0, 0}, lame_from_engineering(1.0, 0.3)), ConfigError);
}

TEST(GridVelocity, StaticGridIsZero) {
  const std::vector<double> d{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(grid_velocity(d, d, 0.01).norm(), 0.0);
}

TEST(GridVelocity, LinearMotionIsExact) {
  const Vec2 v(1.5, -0.25);
  const double dt = 0.02, t = 0.3;
  const std::vector<double> d0{v.x() * t, v.y() * t}, d1{v.x() * (t + dt), v.y() * (t + dt)};
  const Vector u = grid_velocity(d1, d0, dt);
  EXPECT_NEAR(u[0], v.x(), 1e-13);
  EXPECT_NEAR(u[1], v.y(), 1e-13);
  // The theta-consistent form is exact as well once the previous velocity is.
  const std::vector<double> u_prev{v.x(), v.y()};
  const Vector w = grid_velocity(d1, d0, dt, 0.6, true, u_prev);
  EXPECT_NEAR(w[0], v.x(), 1e-12);
  EXPECT_NEAR(w[1], v.y(), 1e-12);
}

TEST(GridVelocity, CylinderLawDerivative) {
  const double pi = 3.14159265358979323846;
  auto d1 = [&](double t) { return 0.8 + 0.8 * std::sin(2.0 * pi / 3.0 * (t - 0.75)); };
  const double dt = 0.001;
  const std::vector<double> prev{d1(0.75 - dt), 0.0}, cur{d1(0.75), 0.0};
  const Vector u = grid_velocity(cur, prev, dt);
  EXPECT_NEAR(u[0], 0.8 * 2.0 * pi / 3.0, dt * 2.0);
  EXPECT_NEAR(0.8 * 2.0 * pi / 3.0, 1.675516, 1e-6);
}

}  // namespace
}  // namespace hyfsi
