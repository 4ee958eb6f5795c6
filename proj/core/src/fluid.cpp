#include "hyfsi/fluid.hpp"

#include <algorithm>
#include <cmath>

namespace hyfsi {

void FluidParams::validate() const {
  if (!(rho > 0.0) || !(mu > 0.0)) throw ConfigError("fluid density and viscosity must be positive");
  if (!(C_I > 0.0)) throw ConfigError("C_I must be positive");
  if (c_u < 0.0 || c_sigma < 0.0 || gamma_c < 0.0 || gamma_u < 0.0 || gamma_p < 0.0) {
    throw ConfigError("stabilization constants must be non-negative");
  }
}

std::array<int, 12> FluidView::element_dofs(int e) const {
  std::array<int, 12> d;
  const auto& el = mesh->elements[e];
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 3; ++c) d[3 * a + c] = dofs->dof(field, el[a], c);
  return d;
}

double tau_M(const FluidParams& fp, double dt, const Vec2& c, const Metric& m) {
  const double t = std::isfinite(dt) ? 2.0 * fp.rho / dt : 0.0;
  const Vec2 rc = fp.rho * c;
  return 1.0 / std::sqrt(t * t + rc.dot(m.G * rc) + fp.C_I * fp.mu * fp.mu * m.GG);
}

double tau_C(double tau_m, double trG) { return 1.0 / (tau_m * trG); }

ElementScaling element_scaling(const FluidView& view, int e, const FluidParams& fp,
                               const FluidTimeScheme& ts) {
  ElementScaling s;
  const auto q = view.mesh->corners(e, view.coords);
  s.h = element_diameter(q);
  for (int v : view.mesh->elements[e]) {
    s.c_inf = std::max(s.c_inf, (view.nodal_u_lin(v) - view.nodal_grid_velocity(v)).norm());
  }
  s.phi = fp.nu() + fp.c_u * s.c_inf * s.h + fp.c_sigma * ts.sigma() * s.h * s.h;
  return s;
}

std::vector<QuadPoint> fluid_element_quadrature(const FluidView& view, int e) {
  const auto q = view.mesh->corners(e, view.coords);
  std::vector<QuadPoint> pts;
  if (view.cut) {
    const CellKind k = view.cut->kind[e];
    if (k == CellKind::Void) return pts;
    if (k == CellKind::Cut) {
      for (const auto& qp : view.cut->volume_quadrature[e]) {
        const auto xi = map_to_reference(q, qp.x);
        if (!xi) throw AssemblyError("cut quadrature point outside element " + std::to_string(e));
        pts.push_back({*xi, qp.w});
      }
      return pts;
    }
  }
  for (const auto& g : gauss_quad(2)) {
    const auto b = eval_basis(q, g.x, false, e);
    if (b.detJ <= 0.0) throw DegenerateElement(e, b.detJ);
    pts.push_back({g.x, g.w * b.detJ});
  }
  return pts;
}

void assemble_fluid_domain(const FluidView& view, const FluidParams& fp, const FluidTimeScheme& ts,
                           const BodyForce& body, Accumulator& acc, FluidTerms terms) {
  const QuadMesh& mesh = *view.mesh;
  const double rho = fp.rho, mu = fp.mu;
  const double sigma = ts.sigma(), hist = ts.history_factor();
  const bool transient = !ts.steady;
  const Source src = view.field == Field::Background ? Source::FluidBackground : Source::FluidPatch;
  const bool want_K = acc.with_matrix();

  Eigen::Matrix<double, 12, 12> K;
  Eigen::Matrix<double, 12, 1> r;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto pts = fluid_element_quadrature(view, e);
    if (pts.empty()) continue;
    const auto q = mesh.corners(e, view.coords);
    const auto& el = mesh.elements[e];
    const auto dofs = view.element_dofs(e);
    for (int d : dofs)
      if (d < 0) throw AssemblyError("fluid element " + std::to_string(e) + " references an inactive dof");

    std::array<Vec2, 4> ua, ula, ga, upa, apa;
    std::array<double, 4> pa;
    for (int a = 0; a < 4; ++a) {
      ua[a] = view.nodal_u(el[a]);
      ula[a] = view.nodal_u_lin(el[a]);
      ga[a] = view.nodal_grid_velocity(el[a]);
      pa[a] = view.nodal_p(el[a]);
      upa[a] = view.u_prev.empty() ? Vec2::Zero() : Vec2(view.u_prev[2 * el[a]], view.u_prev[2 * el[a] + 1]);
      apa[a] = view.a_prev.empty() ? Vec2::Zero() : Vec2(view.a_prev[2 * el[a]], view.a_prev[2 * el[a] + 1]);
    }

    K.setZero();
    r.setZero();
    for (const auto& qp : pts) {
      const auto B = eval_basis(q, qp.x, terms.rbvm, e);
      const double w = qp.w;
      Vec2 u = Vec2::Zero(), ul = Vec2::Zero(), ug = Vec2::Zero(), gp = Vec2::Zero();
      Vec2 uprev = Vec2::Zero(), aprev = Vec2::Zero();
      Mat2 gu = Mat2::Zero();  // gu(i, j) = d u_i / d x_j
      double p = 0.0;
      Vec2 visc = Vec2::Zero();  // Laplacian(u) + grad(div u)
      for (int a = 0; a < 4; ++a) {
        u += B.N[a] * ua[a];
        ul += B.N[a] * ula[a];
        ug += B.N[a] * ga[a];
        uprev += B.N[a] * upa[a];
        aprev += B.N[a] * apa[a];
        p += B.N[a] * pa[a];
        gp += pa[a] * B.dN[a];
        gu += ua[a] * B.dN[a].transpose();
        if (terms.rbvm) {
          const Mat2& H = B.d2N[a];
          visc += ua[a] * H.trace() + H * ua[a];
        }
      }
      const Vec2 c = u - ug;
      const Vec2 cl = ul - ug;
      const double divu = gu.trace();
      const Vec2 acc_u = transient ? Vec2(sigma * (u - uprev) - hist * aprev) : Vec2::Zero();
      const Vec2 b = body ? body(B.x) : Vec2::Zero();
      const Vec2 conv = gu * c;
      const Mat2 two_eps = gu + gu.transpose();

      std::array<double, 4> cdN, cldN, lapN;
      for (int a = 0; a < 4; ++a) {
        cdN[a] = c.dot(B.dN[a]);
        cldN[a] = cl.dot(B.dN[a]);
        lapN[a] = B.d2N[a].trace();
      }

      if (terms.galerkin) {
        for (int a = 0; a < 4; ++a) {
          for (int i = 0; i < 2; ++i) {
            r[3 * a + i] += w * (B.N[a] * rho * (acc_u[i] + conv[i] - b[i]) +
                                 mu * two_eps.row(i).dot(B.dN[a]) - p * B.dN[a][i]);
          }
          r[3 * a + 2] += w * B.N[a] * divu;
        }
        if (want_K) {
          for (int a = 0; a < 4; ++a) {
            for (int bb = 0; bb < 4; ++bb) {
              const double mass = rho * B.N[a] * (sigma * B.N[bb] + cdN[bb]);
              const double lap = mu * B.dN[a].dot(B.dN[bb]);
              for (int i = 0; i < 2; ++i) {
                for (int k = 0; k < 2; ++k) {
                  double v = rho * B.N[a] * B.N[bb] * gu(i, k) + mu * B.dN[bb][i] * B.dN[a][k];
                  if (i == k) v += mass + lap;
                  K(3 * a + i, 3 * bb + k) += w * v;
                }
                K(3 * a + i, 3 * bb + 2) -= w * B.N[bb] * B.dN[a][i];
                K(3 * a + 2, 3 * bb + i) += w * B.N[a] * B.dN[bb][i];
              }
            }
          }
        }
      }

      if (terms.rbvm) {
        const Metric m = metric_quantities(B);
        const double tm = tau_M(fp, ts.steady ? std::numeric_limits<double>::infinity() : ts.dt, cl, m);
        const double tc = tau_C(tm, m.trG);
        const Vec2 RM = rho * acc_u + rho * conv + gp - mu * visc - rho * b;
        for (int a = 0; a < 4; ++a) {
          for (int i = 0; i < 2; ++i) {
            r[3 * a + i] += w * (tm * rho * cldN[a] * RM[i] + tc * divu * B.dN[a][i]);
          }
          r[3 * a + 2] += w * tm * B.dN[a].dot(RM);
        }
        if (want_K) {
          // dRM_i / du_{b,k} and dRM_i / dp_b
          for (int bb = 0; bb < 4; ++bb) {
            Mat2 dRu;
            for (int i = 0; i < 2; ++i) {
              for (int k = 0; k < 2; ++k) {
                double v = rho * B.N[bb] * gu(i, k) - mu * B.d2N[bb](i, k);
                if (i == k) v += rho * sigma * B.N[bb] + rho * cdN[bb] - mu * lapN[bb];
                dRu(i, k) = v;
              }
            }
            const Vec2& dRp = B.dN[bb];
            for (int a = 0; a < 4; ++a) {
              const double supg = w * tm * rho * cldN[a];
              for (int i = 0; i < 2; ++i) {
                for (int k = 0; k < 2; ++k) {
                  K(3 * a + i, 3 * bb + k) += supg * dRu(i, k) + w * tc * B.dN[a][i] * B.dN[bb][k];
                }
                K(3 * a + i, 3 * bb + 2) += supg * dRp[i];
              }
              const Vec2 pspg = w * tm * B.dN[a];
              for (int k = 0; k < 2; ++k) K(3 * a + 2, 3 * bb + k) += pspg.dot(dRu.col(k));
              K(3 * a + 2, 3 * bb + 2) += pspg.dot(dRp);
            }
          }
        }
      }
    }
    const Eigen::VectorXd rv = r;
    const Eigen::MatrixXd Kv = K;
    acc.add(dofs, rv, want_K ? &Kv : nullptr, make_tag(src, e));
  }
}

void assemble_ghost_penalty(const FluidView& view, const FluidParams& fp, const FluidTimeScheme& ts,
                            Accumulator& acc) {
  if (view.field != Field::Background || view.cut == nullptr) {
    throw AssemblyError("ghost penalty is only defined on the cut background mesh");
  }
  const QuadMesh& mesh = *view.mesh;
  const double rho = fp.rho, sigma = ts.sigma();
  const auto& g = gauss_legendre(2);
  const bool want_K = acc.with_matrix();

  for (int f : view.cut->gp_facets) {
    const auto& fc = mesh.interior_facets[f];
    const std::array<int, 2> side{fc.left, fc.right};
    const Vec2 xa = view.coords[fc.a], xb = view.coords[fc.b];
    const double len = (xb - xa).norm();
    const Vec2 n = Vec2((xb - xa).y(), -(xb - xa).x()) / len;

    const auto sl = element_scaling(view, fc.left, fp, ts);
    const auto sr = element_scaling(view, fc.right, fp, ts);
    const double hF = 0.5 * (sl.h + sr.h);
    const double phi_u = 0.5 * (sl.phi + sr.phi);
    const double phi_cp = 0.5 * (sl.h * sl.h / sl.phi + sr.h * sr.h / sr.phi);
    const double cinf = std::max(sl.c_inf, sr.c_inf);
    const double coef_c = fp.gamma_c * rho * (fp.nu() + phi_cp * cinf * cinf + sigma * hF * hF) * hF;
    const double coef_u = fp.gamma_u * phi_u * rho * hF;
    const double coef_p = fp.gamma_p * phi_cp / rho * hF;

    std::array<int, 24> dofs;
    for (int s = 0; s < 2; ++s) {
      const auto d = view.element_dofs(side[s]);
      std::copy(d.begin(), d.end(), dofs.begin() + 12 * s);
    }
    Eigen::Matrix<double, 24, 24> K = Eigen::Matrix<double, 24, 24>::Zero();
    for (std::size_t qi = 0; qi < g.points.size(); ++qi) {
      const Vec2 x = xa + 0.5 * (1.0 + g.points[qi]) * (xb - xa);
      const double w = 0.5 * g.weights[qi] * len;
      std::array<Vec2, 24> jn;
      std::array<double, 24> jd, jp;
      for (int s = 0; s < 2; ++s) {
        const auto q = mesh.corners(side[s], view.coords);
        const auto xi = map_to_reference(q, x);
        if (!xi) throw AssemblyError("ghost-penalty point outside element");
        const auto B = eval_basis(q, *xi, false, side[s]);
        const double sgn = s == 0 ? 1.0 : -1.0;
        for (int a = 0; a < 4; ++a) {
          const double dn = sgn * B.dN[a].dot(n);
          for (int c = 0; c < 3; ++c) {
            const int I = 12 * s + 3 * a + c;
            jn[I] = Vec2::Zero();
            jd[I] = 0.0;
            jp[I] = 0.0;
            if (c < 2) {
              jn[I][c] = dn;
              jd[I] = sgn * B.dN[a][c];
            } else {
              jp[I] = dn;
            }
          }
        }
      }
      for (int I = 0; I < 24; ++I) {
        for (int J = 0; J < 24; ++J) {
          K(I, J) += w * (coef_c * jn[I].dot(jn[J]) + coef_u * jd[I] * jd[J] + coef_p * jp[I] * jp[J]);
        }
      }
    }
    Eigen::Matrix<double, 24, 1> x;
    for (int s = 0; s < 2; ++s) {
      const auto& el = mesh.elements[side[s]];
      for (int a = 0; a < 4; ++a) {
        const Vec2 u = view.nodal_u(el[a]);
        x[12 * s + 3 * a] = u.x();
        x[12 * s + 3 * a + 1] = u.y();
        x[12 * s + 3 * a + 2] = view.nodal_p(el[a]);
      }
    }
    const Eigen::VectorXd rv = K * x;
    const Eigen::MatrixXd Kv = K;
    acc.add(dofs, rv, want_K ? &Kv : nullptr, make_tag(Source::GhostPenalty, f));
  }
}

}  // namespace hyfsi
