#pragma once

#include <functional>
#include <limits>
#include <span>

#include "hyfsi/assembly.hpp"
#include "hyfsi/cutcell.hpp"
#include "hyfsi/fem.hpp"
#include "hyfsi/mesh.hpp"

namespace hyfsi {

struct FluidParams {
  double rho = 1.0;
  double mu = 1.0;
  double C_I = 36.0;
  double c_u = 1.0;
  double c_sigma = 1.0;
  double gamma_c = 0.05;
  double gamma_u = 0.05;
  double gamma_p = 0.05;
  bool ghost_penalty = true;

  double nu() const { return mu / rho; }
  void validate() const;
  bool operator==(const FluidParams&) const = default;
};

// One-step-theta coefficients. A steady scheme drops every time term.
struct FluidTimeScheme {
  double dt = std::numeric_limits<double>::infinity();
  double theta = 1.0;
  bool steady = true;

  static FluidTimeScheme transient(double dt, double theta) { return {dt, theta, false}; }
  double sigma() const { return steady ? 0.0 : 1.0 / (theta * dt); }
  double history_factor() const { return steady ? 0.0 : (1.0 - theta) / theta; }
  double inv_dt() const { return steady ? 0.0 : 1.0 / dt; }
};

using BodyForce = std::function<Vec2(const Vec2&)>;

// A fluid mesh together with the nodal data needed to evaluate its
// residual. Nodal arrays are full length (every mesh node), vectors are
// interleaved (x, y). `u_lin` is the state the frozen stabilization
// parameters are computed from; empty arrays mean zero.
struct FluidView {
  const QuadMesh* mesh = nullptr;
  std::span<const Vec2> coords;
  Field field = Field::Patch;
  const DofMap* dofs = nullptr;
  const CutState* cut = nullptr;  // background only
  std::span<const double> u;
  std::span<const double> p;
  std::span<const double> u_lin;
  std::span<const double> u_prev;
  std::span<const double> a_prev;
  std::span<const double> grid_velocity;

  Vec2 nodal_u(int node) const { return u.empty() ? Vec2::Zero() : Vec2(u[2 * node], u[2 * node + 1]); }
  Vec2 nodal_u_lin(int node) const {
    return u_lin.empty() ? Vec2::Zero() : Vec2(u_lin[2 * node], u_lin[2 * node + 1]);
  }
  Vec2 nodal_grid_velocity(int node) const {
    return grid_velocity.empty() ? Vec2::Zero()
                                 : Vec2(grid_velocity[2 * node], grid_velocity[2 * node + 1]);
  }
  double nodal_p(int node) const { return p.empty() ? 0.0 : p[node]; }
  std::array<int, 12> element_dofs(int e) const;
};

struct FluidTerms {
  bool galerkin = true;
  bool rbvm = true;
};

double tau_M(const FluidParams& fp, double dt, const Vec2& c, const Metric& m);
double tau_C(double tau_m, double trG);

// Per-element scalings shared by ghost penalty and Nitsche terms.
struct ElementScaling {
  double h = 0.0;      // element diameter
  double c_inf = 0.0;  // max nodal convective speed |u_lin - u_grid|
  double phi = 0.0;    // nu + c_u c_inf h + c_sigma sigma h^2
};
ElementScaling element_scaling(const FluidView& view, int e, const FluidParams& fp,
                               const FluidTimeScheme& ts);

// Quadrature used on element e as reference points with physical weights:
// 2x2 Gauss for uncut elements, the cut-cell rule for CUT elements and
// nothing for VOID elements.
std::vector<QuadPoint> fluid_element_quadrature(const FluidView& view, int e);

void assemble_fluid_domain(const FluidView& view, const FluidParams& fp, const FluidTimeScheme& ts,
                           const BodyForce& body, Accumulator& acc, FluidTerms terms = {});

// Face-jump penalty on the CutState's ghost-penalty facets (k = 1).
void assemble_ghost_penalty(const FluidView& view, const FluidParams& fp, const FluidTimeScheme& ts,
                            Accumulator& acc);

}  // namespace hyfsi
