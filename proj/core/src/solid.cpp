#include "hyfsi/solid.hpp"

#include <cmath>
#include <string>

namespace hyfsi {

Lame lame_from_engineering(double E, double nu) {
  if (!(E > 0.0)) throw ConfigError("Young's modulus must be positive");
  if (!(nu > -1.0 && nu < 0.5)) {
    throw ConfigError("Poisson ratio must lie in (-1, 0.5); the incompressible limit is unsupported");
  }
  return {E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), E / (2.0 * (1.0 + nu))};
}

void SolidParams::validate() const {
  if (!(rho > 0.0)) throw ConfigError("solid density must be positive");
  lame_from_engineering(E, nu);
  if (!(rho_inf >= 0.0 && rho_inf <= 1.0)) throw ConfigError("spectral radius must lie in [0, 1]");
}

namespace {

struct Kinematics {
  Mat2 Cinv;
  double J;
};

Kinematics kinematics(const Mat2& F, int element) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw ElementInversion(element, J);
  const Mat2 C = F.transpose() * F;
  return {C.inverse(), J};
}

}  // namespace

Mat2 pk2_stress(const Mat2& F, const Lame& lame, int element) {
  const auto k = kinematics(F, element);
  return lame.mu * (Mat2::Identity() - k.Cinv) + lame.lambda * std::log(k.J) * k.Cinv;
}

Eigen::Matrix3d material_tangent(const Mat2& F, const Lame& lame, int element) {
  const auto k = kinematics(F, element);
  const Mat2& Ci = k.Cinv;
  const double m = lame.mu - lame.lambda * std::log(k.J);
  constexpr int I[3] = {0, 1, 0};
  constexpr int Jx[3] = {0, 1, 1};
  Eigen::Matrix3d D;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      const int i = I[a], j = Jx[a], kk = I[b], l = Jx[b];
      D(a, b) = lame.lambda * Ci(i, j) * Ci(kk, l) + m * (Ci(i, kk) * Ci(j, l) + Ci(i, l) * Ci(j, kk));
    }
  }
  return D;
}

GeneralizedAlpha GeneralizedAlpha::from_spectral_radius(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("spectral radius must lie in [0, 1]");
  GeneralizedAlpha g;
  g.rho_inf = r;
  g.alpha_f = r / (r + 1.0);
  g.alpha_m = (2.0 * r - 1.0) / (r + 1.0);
  g.beta = 0.25 * (1.0 - g.alpha_m + g.alpha_f) * (1.0 - g.alpha_m + g.alpha_f);
  g.gamma = 0.5 - g.alpha_m + g.alpha_f;
  return g;
}

double SolidTimeScheme::velocity(double d, double d_prev, double v_prev, double a_prev) const {
  if (steady) return 0.0;
  return ga.velocity(ga.acceleration(d, d_prev, v_prev, a_prev, dt), v_prev, a_prev, dt);
}

std::array<int, 8> SolidView::element_dofs(int e) const {
  std::array<int, 8> out;
  const auto& el = mesh->elements[e];
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 2; ++c) out[2 * a + c] = dofs->dof(Field::Solid, el[a], c);
  return out;
}

void solid_element(const Corners& X, std::span<const double, 8> d, const SolidParams& sp, int element,
                   Eigen::Matrix<double, 8, 1>& f, Eigen::Matrix<double, 8, 8>* K) {
  const Lame lame = sp.lame();
  f.setZero();
  if (K) K->setZero();
  for (const auto& g : gauss_quad(2)) {
    const auto B = eval_basis(X, g.x, false, element);
    const double w = g.w * B.detJ;
    Mat2 F = Mat2::Identity();
    for (int a = 0; a < 4; ++a) F += Vec2(d[2 * a], d[2 * a + 1]) * B.dN[a].transpose();
    const Mat2 S = pk2_stress(F, lame, element);
    const Eigen::Vector3d Sv(S(0, 0), S(1, 1), S(0, 1));
    Eigen::Matrix<double, 3, 8> Bm;
    for (int a = 0; a < 4; ++a) {
      const double n1 = B.dN[a].x(), n2 = B.dN[a].y();
      for (int i = 0; i < 2; ++i) {
        Bm(0, 2 * a + i) = F(i, 0) * n1;
        Bm(1, 2 * a + i) = F(i, 1) * n2;
        Bm(2, 2 * a + i) = F(i, 0) * n2 + F(i, 1) * n1;
      }
    }
    f.noalias() += w * Bm.transpose() * Sv;
    for (int a = 0; a < 4; ++a) {
      f[2 * a] -= w * sp.rho * B.N[a] * sp.body_force.x();
      f[2 * a + 1] -= w * sp.rho * B.N[a] * sp.body_force.y();
    }
    if (K) {
      const Eigen::Matrix3d D = material_tangent(F, lame, element);
      K->noalias() += w * Bm.transpose() * D * Bm;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const double geo = w * B.dN[a].dot(S * B.dN[b]);
          (*K)(2 * a, 2 * b) += geo;
          (*K)(2 * a + 1, 2 * b + 1) += geo;
        }
      }
    }
  }
}

Eigen::Matrix<double, 8, 8> solid_element_mass(const Corners& X, double rho) {
  Eigen::Matrix<double, 8, 8> M = Eigen::Matrix<double, 8, 8>::Zero();
  for (const auto& g : gauss_quad(2)) {
    const auto B = eval_basis(X, g.x);
    const double w = g.w * B.detJ * rho;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        M(2 * a, 2 * b) += w * B.N[a] * B.N[b];
        M(2 * a + 1, 2 * b + 1) += w * B.N[a] * B.N[b];
      }
  }
  return M;
}

namespace {
std::array<double, 8> gather(const QuadMesh& mesh, int e, std::span<const double> v) {
  std::array<double, 8> out{};
  if (v.empty()) return out;
  const auto& el = mesh.elements[e];
  for (int a = 0; a < 4; ++a) {
    out[2 * a] = v[2 * el[a]];
    out[2 * a + 1] = v[2 * el[a] + 1];
  }
  return out;
}
}  // namespace

Vector solid_internal_force(const QuadMesh& mesh, std::span<const double> d, const SolidParams& sp) {
  Vector out = Vector::Zero(2 * mesh.num_nodes());
  Eigen::Matrix<double, 8, 1> f;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto de = gather(mesh, e, d);
    solid_element(mesh.corners(e), de, sp, e, f, nullptr);
    const auto& el = mesh.elements[e];
    for (int a = 0; a < 4; ++a) {
      out[2 * el[a]] += f[2 * a];
      out[2 * el[a] + 1] += f[2 * a + 1];
    }
  }
  return out;
}

void assemble_solid(const SolidView& view, const SolidParams& sp, const SolidTimeScheme& ts,
                    Accumulator& acc) {
  const QuadMesh& mesh = *view.mesh;
  const auto& ga = ts.ga;
  const bool want_K = acc.with_matrix();
  const double inv = ts.steady ? 0.0 : 1.0 / (1.0 - ga.alpha_f);
  const double mass_scale = ts.steady ? 0.0 : (1.0 - ga.alpha_m) * inv * ga.da_dd(ts.dt);

  Eigen::Matrix<double, 8, 1> f;
  Eigen::Matrix<double, 8, 8> K;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto dofs = view.element_dofs(e);
    const auto X = mesh.corners(e);
    const auto de = gather(mesh, e, view.d);
    solid_element(X, de, sp, e, f, want_K ? &K : nullptr);
    if (!ts.steady) {
      const auto dp = gather(mesh, e, view.d_prev);
      const auto vp = gather(mesh, e, view.v_prev);
      const auto ap = gather(mesh, e, view.a_prev);
      Eigen::Matrix<double, 8, 1> amix;
      for (int i = 0; i < 8; ++i) {
        const double a = ga.acceleration(de[i], dp[i], vp[i], ap[i], ts.dt);
        amix[i] = ((1.0 - ga.alpha_m) * a + ga.alpha_m * ap[i]) * inv;
      }
      const auto M = solid_element_mass(X, sp.rho);
      f += M * amix;
      if (want_K) K += mass_scale * M;
    }
    const Eigen::VectorXd fv = f;
    const Eigen::MatrixXd Kv = K;
    acc.add(dofs, fv, want_K ? &Kv : nullptr, make_tag(Source::Solid, e));
  }

  if (ts.steady || ga.alpha_f == 0.0) return;
  const double hist = ga.alpha_f * inv;
  const std::uint64_t tag = make_tag(Source::Solid, static_cast<std::uint64_t>(mesh.num_elements()));
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    for (int c = 0; c < 2; ++c) {
      const int row = view.dofs->dof(Field::Solid, n, c);
      if (row < 0) continue;
      double v = 0.0;
      if (!view.f_int_prev.empty()) v += view.f_int_prev[2 * n + c];
      if (!view.c_prev.empty()) v += view.c_prev[2 * n + c];
      if (v != 0.0) acc.add_residual(row, hist * v, tag);
    }
  }
}

}  // namespace hyfsi
