#include "hyfsi/nitsche.hpp"

#include <cmath>
#include <string>

namespace hyfsi {

void CouplingParams::validate() const {
  if (!(gamma > 0.0)) throw ConfigError("Nitsche penalty must be positive");
  if (!(C_tr > 0.0)) throw ConfigError("trace constant must be positive");
  if (adjoint_sign != 1.0 && adjoint_sign != -1.0) throw ConfigError("adjoint sign must be +1 or -1");
  if (mass_penalty_exponent != 1.0 && mass_penalty_exponent != 2.0) {
    throw ConfigError("mass penalty exponent must be 1 or 2");
  }
}

namespace {

// Per-dof derivative data of one fluid element at a point.
struct FluidTraceData {
  std::array<int, 12> dofs;
  std::array<double, 4> N;
  std::array<Vec2, 4> dN;
  Vec2 u;
  double p;
  Mat2 gu;
};

FluidTraceData fluid_trace(const FluidView& view, int e, const Vec2& x) {
  const auto q = view.mesh->corners(e, view.coords);
  const auto xi = map_to_reference(q, x);
  if (!xi) throw AssemblyError("interface point could not be located in element " + std::to_string(e));
  const auto B = eval_basis(q, *xi, false, e);
  FluidTraceData t;
  t.dofs = view.element_dofs(e);
  for (int d : t.dofs)
    if (d < 0) throw AssemblyError("interface element " + std::to_string(e) + " has inactive dofs");
  t.u.setZero();
  t.p = 0.0;
  t.gu.setZero();
  const auto& el = view.mesh->elements[e];
  for (int a = 0; a < 4; ++a) {
    t.N[a] = B.N[a];
    t.dN[a] = B.dN[a];
    const Vec2 ua = view.nodal_u(el[a]);
    t.u += B.N[a] * ua;
    t.p += B.N[a] * view.nodal_p(el[a]);
    t.gu += ua * B.dN[a].transpose();
  }
  return t;
}

Vec2 traction(const FluidTraceData& t, double mu, const Vec2& n) {
  return mu * (t.gu + t.gu.transpose()) * n - t.p * n;
}

// d(traction)/d(dof) and the adjoint test vector for local dof 3a+c.
void traction_derivatives(const FluidTraceData& t, double mu, const Vec2& n, double adj_sign, int I,
                          Vec2& dtr, Vec2& adj) {
  const int a = I / 3, c = I % 3;
  if (c < 2) {
    Vec2 v = t.dN[a].dot(n) * Vec2::Unit(c) + n[c] * t.dN[a];
    dtr = mu * v;
    adj = adj_sign * mu * v;
  } else {
    dtr = -t.N[a] * n;
    adj = -t.N[a] * n;
  }
}

Vec2 velocity_basis(const FluidTraceData& t, int I) {
  const int a = I / 3, c = I % 3;
  return c < 2 ? Vec2(t.N[a] * Vec2::Unit(c)) : Vec2::Zero();
}

// One local system of the unified interface form. For dof I:
//   Jt[I], Jx[I]: d[v]/dI as test and d[u]/dI as trial
//   M[I]: d<u>/dI (fluid-fluid only)
//   T[I]: d(flux traction)/dI, A[I]: adjoint test vector
struct LocalInterface {
  std::vector<int> dofs;
  std::vector<Vec2> Jt, Jx, M, T, A;
  explicit LocalInterface(std::size_t n) : dofs(n), Jt(n), Jx(n), M(n), T(n), A(n) {}
};

struct PointCoefficients {
  double w;
  Vec2 n;
  Vec2 jump;
  Vec2 flux;
  double pen_v;
  double pen_m;
  bool convective;
  double rho;
  double mean_flux;  // rho <u> . n
  double abs_flux;   // frozen |rho <u_lin> . n|
};

void add_point(const LocalInterface& L, const PointCoefficients& c, Eigen::VectorXd& r, Eigen::MatrixXd* K) {
  const int n = static_cast<int>(L.dofs.size());
  const double jn = c.jump.dot(c.n);
  for (int I = 0; I < n; ++I) {
    double v = -c.flux.dot(L.Jt[I]) + c.jump.dot(L.A[I]) + c.pen_v * c.jump.dot(L.Jt[I]) +
               c.pen_m * jn * L.Jt[I].dot(c.n);
    if (c.convective) v += c.mean_flux * c.jump.dot(L.M[I]) + 0.5 * c.abs_flux * c.jump.dot(L.Jt[I]);
    r[I] += c.w * v;
  }
  if (!K) return;
  for (int I = 0; I < n; ++I) {
    for (int J = 0; J < n; ++J) {
      double v = -L.T[J].dot(L.Jt[I]) + L.Jx[J].dot(L.A[I]) + c.pen_v * L.Jx[J].dot(L.Jt[I]) +
                 c.pen_m * L.Jx[J].dot(c.n) * L.Jt[I].dot(c.n);
      if (c.convective) {
        v += c.rho * L.M[J].dot(c.n) * c.jump.dot(L.M[I]) + c.mean_flux * L.Jx[J].dot(L.M[I]) +
             0.5 * c.abs_flux * L.Jx[J].dot(L.Jt[I]);
      }
      (*K)(I, J) += c.w * v;
    }
  }
}

double mass_scaling(double phi, const CouplingParams& cp) {
  return cp.mass_penalty_exponent == 2.0 ? phi * phi : phi;
}

}  // namespace

void assemble_fluid_fluid(const FluidView& bg, const FluidView& patch,
                          std::span<const FluidFluidPoint> points, const FluidParams& fp,
                          const FluidTimeScheme& ts, const CouplingParams& cp, Accumulator& acc) {
  const bool want_K = acc.with_matrix();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& pt = points[k];
    const auto t1 = fluid_trace(bg, pt.background_element, pt.x);
    const auto t2 = fluid_trace(patch, pt.patch_element, pt.x);
    LocalInterface L(24);
    for (int I = 0; I < 12; ++I) {
      L.dofs[I] = t1.dofs[I];
      L.dofs[12 + I] = t2.dofs[I];
      const Vec2 b1 = velocity_basis(t1, I), b2 = velocity_basis(t2, I);
      L.Jt[I] = L.Jx[I] = b1;
      L.Jt[12 + I] = L.Jx[12 + I] = -b2;
      L.M[I] = 0.5 * b1;
      L.M[12 + I] = 0.5 * b2;
      L.T[I] = L.A[I] = Vec2::Zero();
      traction_derivatives(t2, fp.mu, pt.n, cp.adjoint_sign, I, L.T[12 + I], L.A[12 + I]);
    }
    const auto s1 = element_scaling(bg, pt.background_element, fp, ts);
    const auto s2 = element_scaling(patch, pt.patch_element, fp, ts);

    Vec2 ul = Vec2::Zero();
    for (int a = 0; a < 4; ++a) {
      ul += 0.5 * t1.N[a] * bg.nodal_u_lin(bg.mesh->elements[pt.background_element][a]);
      ul += 0.5 * t2.N[a] * patch.nodal_u_lin(patch.mesh->elements[pt.patch_element][a]);
    }
    PointCoefficients c;
    c.w = pt.w;
    c.n = pt.n;
    c.jump = t1.u - t2.u;
    c.flux = traction(t2, fp.mu, pt.n);
    c.pen_v = cp.gamma * fp.mu * cp.C_tr / pt.h;
    c.pen_m = cp.gamma * fp.rho * 0.5 * (mass_scaling(s1.phi, cp) + mass_scaling(s2.phi, cp)) / pt.h;
    c.convective = cp.convective;
    c.rho = fp.rho;
    c.mean_flux = fp.rho * (0.5 * (t1.u + t2.u)).dot(pt.n);
    c.abs_flux = std::abs(fp.rho * ul.dot(pt.n));

    Eigen::VectorXd r = Eigen::VectorXd::Zero(24);
    Eigen::MatrixXd K;
    if (want_K) K = Eigen::MatrixXd::Zero(24, 24);
    add_point(L, c, r, want_K ? &K : nullptr);
    acc.add(L.dofs, r, want_K ? &K : nullptr, make_tag(Source::NitscheFluidFluid, k));
  }
}

void assemble_fluid_solid(const FluidView& fluid, const SolidTrace& solid,
                          std::span<const FluidSolidPoint> points, const FluidParams& fp,
                          const FluidTimeScheme& ts, const CouplingParams& cp, Accumulator& acc,
                          Vector* c_solid) {
  const bool want_K = acc.with_matrix();
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& pt = points[k];
    const auto t = fluid_trace(fluid, pt.fluid_element, pt.x);
    LocalInterface L(16);
    for (int I = 0; I < 12; ++I) {
      L.dofs[I] = t.dofs[I];
      L.Jt[I] = L.Jx[I] = velocity_basis(t, I);
      L.M[I] = Vec2::Zero();
      traction_derivatives(t, fp.mu, pt.n, cp.adjoint_sign, I, L.T[I], L.A[I]);
    }
    Vec2 us = Vec2::Zero();
    for (int s = 0; s < 2; ++s) {
      const int node = pt.solid_nodes[s];
      const double ws = pt.solid_weights[s];
      if (!solid.velocity.empty()) us += ws * Vec2(solid.velocity[2 * node], solid.velocity[2 * node + 1]);
      for (int comp = 0; comp < 2; ++comp) {
        const int I = 12 + 2 * s + comp;
        L.dofs[I] = solid.dofs->dof(Field::Solid, node, comp);
        if (L.dofs[I] < 0) throw AssemblyError("fluid-solid point references an inactive solid dof");
        L.Jt[I] = -ws * Vec2::Unit(comp);
        L.Jx[I] = -ws * solid.dv_dd * Vec2::Unit(comp);
        L.M[I] = L.T[I] = L.A[I] = Vec2::Zero();
      }
    }
    const auto sc = element_scaling(fluid, pt.fluid_element, fp, ts);
    PointCoefficients c;
    c.w = pt.w;
    c.n = pt.n;
    c.jump = t.u - us;
    c.flux = traction(t, fp.mu, pt.n);
    c.pen_v = cp.gamma * fp.mu / pt.h;
    c.pen_m = cp.gamma * fp.rho * mass_scaling(sc.phi, cp) / pt.h;
    c.convective = false;
    c.rho = fp.rho;
    c.mean_flux = c.abs_flux = 0.0;

    Eigen::VectorXd r = Eigen::VectorXd::Zero(16);
    Eigen::MatrixXd K;
    if (want_K) K = Eigen::MatrixXd::Zero(16, 16);
    add_point(L, c, r, want_K ? &K : nullptr);
    acc.add(L.dofs, r, want_K ? &K : nullptr, make_tag(Source::NitscheFluidSolid, k));
    if (c_solid) {
      for (int s = 0; s < 2; ++s)
        for (int comp = 0; comp < 2; ++comp) (*c_solid)[2 * pt.solid_nodes[s] + comp] += r[12 + 2 * s + comp];
    }
  }
}

double interface_jump_integral(const FluidView& bg, const FluidView& patch,
                               std::span<const FluidFluidPoint> points) {
  double sum = 0.0;
  for (const auto& pt : points) {
    const auto t1 = fluid_trace(bg, pt.background_element, pt.x);
    const auto t2 = fluid_trace(patch, pt.patch_element, pt.x);
    sum += pt.w * (t1.u - t2.u).norm();
  }
  return sum;
}

double interface_slip_l2(const FluidView& fluid, const SolidTrace& solid,
                         std::span<const FluidSolidPoint> points) {
  double sum = 0.0;
  for (const auto& pt : points) {
    const auto t = fluid_trace(fluid, pt.fluid_element, pt.x);
    Vec2 us = Vec2::Zero();
    if (!solid.velocity.empty()) {
      for (int s = 0; s < 2; ++s) {
        const int node = pt.solid_nodes[s];
        us += pt.solid_weights[s] * Vec2(solid.velocity[2 * node], solid.velocity[2 * node + 1]);
      }
    }
    sum += pt.w * (t.u - us).squaredNorm();
  }
  return std::sqrt(sum);
}

}  // namespace hyfsi
