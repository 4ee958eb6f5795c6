#include "hyfsi/fem.hpp"

#include <algorithm>
#include <cmath>

namespace hyfsi {

namespace {
constexpr std::array<double, 4> kXi{-1.0, 1.0, 1.0, -1.0};
constexpr std::array<double, 4> kEta{-1.0, -1.0, 1.0, 1.0};
}  // namespace

const GaussRule1D& gauss_legendre(int n) {
  static const std::array<GaussRule1D, 4> rules = [] {
    std::array<GaussRule1D, 4> r;
    r[0] = {{0.0}, {2.0}};
    const double a = 1.0 / std::sqrt(3.0);
    r[1] = {{-a, a}, {1.0, 1.0}};
    const double b = std::sqrt(0.6);
    r[2] = {{-b, 0.0, b}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}};
    const double c1 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
    const double c2 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
    const double w1 = (18.0 + std::sqrt(30.0)) / 36.0, w2 = (18.0 - std::sqrt(30.0)) / 36.0;
    r[3] = {{-c2, -c1, c1, c2}, {w2, w1, w1, w2}};
    return r;
  }();
  if (n < 1 || n > 4) throw Error("Gauss-Legendre rule supports 1..4 points");
  return rules[n - 1];
}

std::vector<QuadPoint> gauss_quad(int n) {
  const auto& g = gauss_legendre(n);
  std::vector<QuadPoint> pts;
  pts.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      pts.push_back({Vec2(g.points[i], g.points[j]), g.weights[i] * g.weights[j]});
  return pts;
}

std::array<double, 4> q1_values(const Vec2& xi) {
  std::array<double, 4> N;
  for (int a = 0; a < 4; ++a) N[a] = 0.25 * (1.0 + kXi[a] * xi.x()) * (1.0 + kEta[a] * xi.y());
  return N;
}

std::array<Vec2, 4> q1_ref_gradients(const Vec2& xi) {
  std::array<Vec2, 4> g;
  for (int a = 0; a < 4; ++a) {
    g[a] = Vec2(0.25 * kXi[a] * (1.0 + kEta[a] * xi.y()), 0.25 * kEta[a] * (1.0 + kXi[a] * xi.x()));
  }
  return g;
}

Vec2 map_to_physical(const Corners& c, const Vec2& xi) {
  const auto N = q1_values(xi);
  return N[0] * c[0] + N[1] * c[1] + N[2] * c[2] + N[3] * c[3];
}

BasisSample eval_basis(const Corners& c, const Vec2& xi, bool with_hessian, int element) {
  BasisSample s;
  s.xi = xi;
  s.N = q1_values(xi);
  const auto g = q1_ref_gradients(xi);
  s.x.setZero();
  s.J.setZero();
  for (int a = 0; a < 4; ++a) {
    s.x += s.N[a] * c[a];
    s.J += c[a] * g[a].transpose();
  }
  s.detJ = s.J.determinant();
  if (std::abs(s.detJ) < 1e-14) throw DegenerateElement(element, s.detJ);
  s.Jinv = s.J.inverse();
  for (int a = 0; a < 4; ++a) s.dN[a] = s.Jinv.transpose() * g[a];
  if (with_hessian) {
    // Reference Hessians: only the mixed derivative of N_a and x_k is nonzero.
    Vec2 xmix = Vec2::Zero();
    for (int a = 0; a < 4; ++a) xmix += 0.25 * kXi[a] * kEta[a] * c[a];
    for (int a = 0; a < 4; ++a) {
      const double nmix = 0.25 * kXi[a] * kEta[a] - s.dN[a].dot(xmix);
      Mat2 h;
      h << 0.0, nmix, nmix, 0.0;
      s.d2N[a] = s.Jinv.transpose() * h * s.Jinv;
    }
  } else {
    for (auto& h : s.d2N) h.setZero();
  }
  return s;
}

std::optional<Vec2> map_to_reference(const Corners& c, const Vec2& x) {
  Vec2 xi = Vec2::Zero();
  for (int it = 0; it < 30; ++it) {
    const auto N = q1_values(xi);
    const auto g = q1_ref_gradients(xi);
    Vec2 r = -x;
    Mat2 J = Mat2::Zero();
    for (int a = 0; a < 4; ++a) {
      r += N[a] * c[a];
      J += c[a] * g[a].transpose();
    }
    const double det = J.determinant();
    if (std::abs(det) < 1e-300) return std::nullopt;
    const Vec2 dxi = J.inverse() * r;
    xi -= dxi;
    if (!std::isfinite(xi.x()) || !std::isfinite(xi.y()) || xi.lpNorm<Eigen::Infinity>() > 1e6) {
      return std::nullopt;
    }
    if (dxi.lpNorm<Eigen::Infinity>() < 1e-15) return xi;
  }
  // Bilinear inversion converges quadratically; accept the last iterate if
  // its mapping residual is at roundoff level.
  const Vec2 back = map_to_physical(c, xi);
  double scale = 0.0;
  for (const auto& p : c) scale = std::max(scale, (p - c[0]).norm());
  if ((back - x).norm() <= 1e-12 * std::max(scale, 1.0)) return xi;
  return std::nullopt;
}

bool point_in_element(const Corners& c, const Vec2& x, double tol) {
  Vec2 lo = c[0], hi = c[0];
  for (const auto& p : c) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double pad = tol * (hi - lo).norm();
  if ((x.array() < lo.array() - pad).any() || (x.array() > hi.array() + pad).any()) return false;
  const auto xi = map_to_reference(c, x);
  return xi && xi->lpNorm<Eigen::Infinity>() <= 1.0 + tol;
}

Metric metric_quantities(const BasisSample& b) {
  Metric m;
  m.G = b.Jinv.transpose() * b.Jinv;
  m.trG = m.G.trace();
  m.GG = m.G.cwiseProduct(m.G).sum();
  return m;
}

}  // namespace hyfsi
