#pragma once

#include <array>
#include <optional>
#include <vector>

#include "hyfsi/types.hpp"

namespace hyfsi {

using Corners = std::array<Vec2, 4>;

// Point with an integration weight. Depending on context `x` is a reference
// coordinate in [-1,1]^2 or a physical coordinate.
struct QuadPoint {
  Vec2 x;
  double w = 0.0;
};

// Gauss-Legendre rule on [-1, 1] with n points (1 <= n <= 4).
struct GaussRule1D {
  std::vector<double> points;
  std::vector<double> weights;
};
const GaussRule1D& gauss_legendre(int n);

// Tensor-product Gauss rule on the reference square, n x n points.
std::vector<QuadPoint> gauss_quad(int n);

std::array<double, 4> q1_values(const Vec2& xi);
std::array<Vec2, 4> q1_ref_gradients(const Vec2& xi);

// Bilinear basis sampled at one reference point. Gradients and Hessians
// are with respect to physical coordinates; Hessians include the
// non-affine mapping term and are only filled when requested.
struct BasisSample {
  Vec2 xi;
  Vec2 x;
  std::array<double, 4> N{};
  std::array<Vec2, 4> dN{};
  std::array<Mat2, 4> d2N{};
  Mat2 J;     // dx/dxi
  Mat2 Jinv;  // dxi/dx
  double detJ = 0.0;
};

// Throws DegenerateElement when |det J| < 1e-14 (element id is only used
// for the message).
BasisSample eval_basis(const Corners& corners, const Vec2& xi,
                       bool with_hessian = false, int element = -1);

Vec2 map_to_physical(const Corners& corners, const Vec2& xi);

// Newton inversion of the bilinear map. Returns nullopt if the iteration
// does not converge; the result may lie outside [-1,1]^2.
std::optional<Vec2> map_to_reference(const Corners& corners, const Vec2& x);

// True if x lies in the element (reference coordinates within 1 + tol).
bool point_in_element(const Corners& corners, const Vec2& x, double tol = 1e-12);

// Metric tensor G = J^{-T} J^{-1} of the element map and its invariants.
struct Metric {
  Mat2 G;
  double trG = 0.0;
  double GG = 0.0;  // G : G
};
Metric metric_quantities(const BasisSample& basis);

}  // namespace hyfsi
