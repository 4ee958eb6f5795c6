#pragma once

#include <array>
#include <span>
#include <vector>

#include "hyfsi/fluid.hpp"
#include "hyfsi/solid.hpp"

namespace hyfsi {

struct CouplingParams {
  double gamma = 50.0;
  double C_tr = 8.0;
  // Viscous adjoint sign: +1 as in the non-symmetric variant, -1 symmetric.
  double adjoint_sign = 1.0;
  // Power of the fluid scaling phi_T in the mass penalty rho phi^k / h.
  double mass_penalty_exponent = 1.0;
  bool convective = true;

  void validate() const;
  bool operator==(const CouplingParams&) const = default;
};

// Quadrature point on the background/patch interface. `n` is the outward
// normal of the background fluid (pointing into the patch).
struct FluidFluidPoint {
  Vec2 x;
  double w = 0.0;
  Vec2 n;
  int background_element = -1;
  int patch_element = -1;
  double h = 0.0;  // patch facet length
};

// Quadrature point on a fluid/solid interface. `n` is the outward normal of
// the fluid. The solid trace is linear between two solid boundary nodes.
struct FluidSolidPoint {
  Vec2 x;
  double w = 0.0;
  Vec2 n;
  int fluid_element = -1;
  std::array<int, 2> solid_nodes{-1, -1};
  std::array<double, 2> solid_weights{0.0, 0.0};
  double h = 0.0;
};

// Solid interface data: nodal velocities of the current iterate and
// d(velocity)/d(displacement) of the time scheme.
struct SolidTrace {
  const DofMap* dofs = nullptr;
  std::span<const double> velocity;  // full length, interleaved
  double dv_dd = 0.0;
};

void assemble_fluid_fluid(const FluidView& background, const FluidView& patch,
                          std::span<const FluidFluidPoint> points, const FluidParams& fp,
                          const FluidTimeScheme& ts, const CouplingParams& cp, Accumulator& acc);

// Adds the fluid-solid terms. If `c_solid` is given, the solid-row part of
// the residual is also accumulated into it (full length, interleaved).
void assemble_fluid_solid(const FluidView& fluid, const SolidTrace& solid,
                          std::span<const FluidSolidPoint> points, const FluidParams& fp,
                          const FluidTimeScheme& ts, const CouplingParams& cp, Accumulator& acc,
                          Vector* c_solid = nullptr);

// Integral of |u_background - u_patch| over the interface.
double interface_jump_integral(const FluidView& background, const FluidView& patch,
                               std::span<const FluidFluidPoint> points);
// L2 norm of the fluid/solid velocity mismatch over the interface.
double interface_slip_l2(const FluidView& fluid, const SolidTrace& solid,
                         std::span<const FluidSolidPoint> points);

}  // namespace hyfsi
