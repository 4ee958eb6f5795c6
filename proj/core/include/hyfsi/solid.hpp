#pragma once

#include <limits>
#include <span>

#include "hyfsi/assembly.hpp"
#include "hyfsi/fem.hpp"
#include "hyfsi/mesh.hpp"

namespace hyfsi {

struct Lame {
  double lambda = 0.0;
  double mu = 0.0;
};

// Throws ConfigError unless E > 0 and -1 < nu < 0.5.
Lame lame_from_engineering(double E, double nu);

struct SolidParams {
  double rho = 1.0;
  double E = 1.0;
  double nu = 0.3;
  double rho_inf = 1.0;
  Vec2 body_force = Vec2::Zero();  // per unit mass

  Lame lame() const { return lame_from_engineering(E, nu); }
  void validate() const;
  bool operator==(const SolidParams&) const = default;
};

// Plane-strain Neo-Hookean second Piola-Kirchhoff stress.
Mat2 pk2_stress(const Mat2& F, const Lame& lame, int element = -1);

// Material tangent dS/dE in Voigt order (11, 22, 12).
Eigen::Matrix3d material_tangent(const Mat2& F, const Lame& lame, int element = -1);

struct GeneralizedAlpha {
  double rho_inf = 1.0;
  double alpha_f = 0.5;
  double alpha_m = 0.5;
  double beta = 0.25;
  double gamma = 0.5;

  static GeneralizedAlpha from_spectral_radius(double rho_inf);

  // Newmark relations: acceleration and velocity at the new level from the
  // new displacement and the previous (d, v, a).
  double acceleration(double d, double d_prev, double v_prev, double a_prev, double dt) const {
    return (d - d_prev - dt * v_prev) / (beta * dt * dt) - (0.5 - beta) / beta * a_prev;
  }
  double velocity(double a, double v_prev, double a_prev, double dt) const {
    return v_prev + dt * ((1.0 - gamma) * a_prev + gamma * a);
  }
  double dv_dd(double dt) const { return gamma / (beta * dt); }
  double da_dd(double dt) const { return 1.0 / (beta * dt * dt); }
};

struct SolidTimeScheme {
  GeneralizedAlpha ga;
  double dt = std::numeric_limits<double>::infinity();
  bool steady = true;

  static SolidTimeScheme transient(double dt, double rho_inf) {
    return {GeneralizedAlpha::from_spectral_radius(rho_inf), dt, false};
  }
  // Velocity of the new level given its displacement (zero when steady).
  double velocity(double d, double d_prev, double v_prev, double a_prev) const;
  double dv_dd() const { return steady ? 0.0 : ga.dv_dd(dt); }
};

// Solid mesh with nodal data on the reference configuration. Nodal vectors
// are full length and interleaved (x, y). `f_int_prev` and `c_prev` hold
// the archived internal force (net of external load) and solid-side
// coupling residual of the previous level; empty means zero.
struct SolidView {
  const QuadMesh* mesh = nullptr;
  const DofMap* dofs = nullptr;
  std::span<const double> d;
  std::span<const double> d_prev;
  std::span<const double> v_prev;
  std::span<const double> a_prev;
  std::span<const double> f_int_prev;
  std::span<const double> c_prev;

  std::array<int, 8> element_dofs(int e) const;
};

// Internal minus external force of one element and optionally its tangent.
void solid_element(const Corners& X, std::span<const double, 8> d, const SolidParams& sp, int element,
                   Eigen::Matrix<double, 8, 1>& f, Eigen::Matrix<double, 8, 8>* K);
// Consistent mass matrix of one element (both components).
Eigen::Matrix<double, 8, 8> solid_element_mass(const Corners& X, double rho);

// Full-length nodal F_int(d) - F_ext.
Vector solid_internal_force(const QuadMesh& mesh, std::span<const double> d, const SolidParams& sp);

// Adds the solid rows (inertia, internal force and previous-level terms).
// The coupling residual of the current level is assembled separately.
void assemble_solid(const SolidView& view, const SolidParams& sp, const SolidTimeScheme& ts,
                    Accumulator& acc);

}  // namespace hyfsi
