#include "hyfsi/driver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <spdlog/spdlog.h>

#include "hyfsi/linear_solver.hpp"

namespace hyfsi {

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Hybrid: return "hybrid";
    case Mode::FixedGrid: return "fixed_grid";
    case Mode::SingleMesh: return "single_mesh";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  if (s == "hybrid") return Mode::Hybrid;
  if (s == "fixed_grid") return Mode::FixedGrid;
  if (s == "single_mesh") return Mode::SingleMesh;
  throw ConfigError("unknown mode '" + s + "' (expected hybrid, fixed_grid or single_mesh)");
}

double TimeCurve::operator()(double t) const {
  switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::SinRamp: {
      const double s = std::min(t, t_end);
      return 0.5 * (1.0 + std::sin(omega * s - 0.5 * std::numbers::pi));
    }
    case Kind::Sine: return A + B * std::sin(omega * (t - t0));
  }
  return 0.0;
}

double DirichletBC::value(const Vec2& X, double t, int component) const {
  if (function) return function(X, t, component);
  return curve(t) * (c0 + cx * X.x() + cy * X.y());
}

void Problem::validate() const {
  switch (mode) {
    case Mode::Hybrid:
      if (!background || !patch) throw ConfigError("hybrid mode needs a background and a patch mesh");
      if (!patch->has_tag("ff")) throw ConfigError("hybrid patch needs boundary facets tagged 'ff'");
      break;
    case Mode::FixedGrid:
      if (!background || !solid || patch) throw ConfigError("fixed-grid mode needs a background and a solid mesh only");
      break;
    case Mode::SingleMesh:
      if (background.has_value() == patch.has_value()) throw ConfigError("single-mesh mode needs exactly one fluid mesh");
      if (solid && !patch) throw ConfigError("a single-mesh solid needs a fitted patch mesh");
      break;
  }
  if (solid && patch && !patch->has_tag("fsi")) throw ConfigError("patch needs facets tagged 'fsi' to couple the solid");
  fluid.validate();
  coupling.validate();
  if (solid) solid_params.validate();
  if (!time.steady) {
    if (!(time.dt > 0.0)) throw ConfigError("time step must be positive");
    if (!(time.theta > 0.0 && time.theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
    if (!(time.rho_inf >= 0.0 && time.rho_inf <= 1.0)) throw ConfigError("rho_inf must lie in [0, 1]");
  }
  if (interface_points < 1 || interface_points > 4) throw ConfigError("interface_points must be 1..4");
  if (newton.max_iterations < 1 || newton.max_cycles < 1) throw ConfigError("Newton limits must be positive");
}

std::vector<char> Geometry::background_active() const {
  std::vector<char> a(dofs.nodes(Field::Background), 0);
  for (int i = 0; i < static_cast<int>(a.size()); ++i) a[i] = dofs.active(Field::Background, i) ? 1 : 0;
  return a;
}

namespace {

const QuadMesh& mesh_of(const Problem& p, Field f) {
  switch (f) {
    case Field::Background: return *p.background;
    case Field::Patch: return *p.patch;
    case Field::Solid: return *p.solid;
  }
  throw ConfigError("bad field");
}

bool has_field(const Problem& p, Field f) {
  switch (f) {
    case Field::Background: return p.background.has_value();
    case Field::Patch: return p.patch.has_value();
    case Field::Solid: return p.solid.has_value();
  }
  return false;
}

std::vector<double>* field_values(FieldState& s, Field f, int comp) {
  switch (f) {
    case Field::Background: return comp == 2 ? &s.background.p : &s.background.u;
    case Field::Patch: return comp == 2 ? &s.patch.p : &s.patch.u;
    case Field::Solid: return &s.d;
  }
  return nullptr;
}

double get_value(const FieldState& s, Field f, int node, int comp) {
  auto* v = field_values(const_cast<FieldState&>(s), f, comp);
  return comp == 2 ? (*v)[node] : (*v)[2 * node + comp];
}

void set_value(FieldState& s, Field f, int node, int comp, double value) {
  auto* v = field_values(s, f, comp);
  if (comp == 2)
    (*v)[node] = value;
  else
    (*v)[2 * node + comp] = value;
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::vector<int> loop_edge_facets(const QuadMesh& mesh, const std::vector<int>& loop) {
  std::map<std::uint64_t, int> facets;
  for (std::size_t f = 0; f < mesh.boundary_facets.size(); ++f) {
    facets[edge_key(mesh.boundary_facets[f].a, mesh.boundary_facets[f].b)] = static_cast<int>(f);
  }
  std::vector<int> out;
  for (std::size_t i = 0; i + 1 < loop.size(); ++i) out.push_back(facets.at(edge_key(loop[i], loop[i + 1])));
  return out;
}

// Norms of the background, patch and solid segments of v.
std::array<double, 3> block_norms(const DofMap& dofs, const Vector& v) {
  std::array<double, 3> out{};
  for (int b = 0; b < kNumFields; ++b) {
    const Field f = static_cast<Field>(b);
    out[b] = dofs.has(f) ? v.segment(dofs.offset(f), dofs.block_size(f)).norm() : 0.0;
  }
  return out;
}

}  // namespace

Solver::Solver(Problem problem) : problem_(std::move(problem)) {
  problem_.validate();
  const Problem& p = problem_;
  if (p.patch && p.mode == Mode::Hybrid) patch_ff_loop_ = boundary_polyline(*p.patch, "ff");
  if (p.patch && p.solid) {
    patch_fsi_nodes_ = p.patch->tagged_nodes("fsi");
    for (std::size_t f = 0; f < p.patch->boundary_facets.size(); ++f)
      if (p.patch->boundary_facets[f].tag == "fsi") patch_fsi_facets_.push_back(static_cast<int>(f));
    const std::vector<int> candidates =
        p.solid->has_tag("fsi") ? p.solid->tagged_nodes("fsi") : [&] {
          std::vector<int> all;
          for (const auto& bf : p.solid->boundary_facets) {
            all.push_back(bf.a);
            all.push_back(bf.b);
          }
          std::sort(all.begin(), all.end());
          all.erase(std::unique(all.begin(), all.end()), all.end());
          return all;
        }();
    Vec2 lo = p.patch->nodes[0], hi = lo;
    for (const auto& x : p.patch->nodes) {
      lo = lo.cwiseMin(x);
      hi = hi.cwiseMax(x);
    }
    const double tol = 1e-9 * (hi - lo).norm();
    patch_to_solid_.assign(p.patch->num_nodes(), -1);
    for (int v : patch_fsi_nodes_) {
      int best = -1;
      double bd = tol;
      for (int s : candidates) {
        const double d = (p.solid->nodes[s] - p.patch->nodes[v]).norm();
        if (d <= bd) {
          bd = d;
          best = s;
        }
      }
      if (best < 0) {
        throw ConfigError("patch interface node " + std::to_string(v) + " has no matching solid node");
      }
      solid_partner_.push_back(best);
      patch_to_solid_[v] = best;
    }
    motion_ = std::make_unique<MeshMotion>(*p.patch, patch_fsi_nodes_, p.solid_params.lame(),
                                           p.nonlinear_mesh_motion);
  }
  if (p.mode == Mode::FixedGrid) {
    solid_fsi_loop_ = boundary_polyline(*p.solid, p.solid->has_tag("fsi") ? "fsi" : p.solid->boundary_facets[0].tag);
  }
  resolve_bcs();
}

Solver::~Solver() = default;

void Solver::resolve_bcs() {
  std::map<std::tuple<int, int, int>, const DirichletBC*> chosen;
  for (const auto& bc : problem_.bcs) {
    if (!has_field(problem_, bc.field)) throw ConfigError("boundary condition on a mesh that does not exist");
    const QuadMesh& m = mesh_of(problem_, bc.field);
    std::vector<int> nodes;
    if (bc.point) {
      int best = -1;
      double bd = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m.num_nodes(); ++i) {
        const double d = (m.nodes[i] - *bc.point).norm();
        if (d < bd) {
          bd = d;
          best = i;
        }
      }
      nodes.push_back(best);
    } else if (bc.tag == "*") {
      for (int i = 0; i < m.num_nodes(); ++i) nodes.push_back(i);
    } else if (m.has_tag(bc.tag)) {
      nodes = m.tagged_nodes(bc.tag);
    } else if (auto it = m.node_sets.find(bc.tag); it != m.node_sets.end()) {
      nodes = it->second;
    } else {
      throw ConfigError("boundary condition references unknown tag '" + bc.tag + "'");
    }
    const int max_comp = bc.field == Field::Solid ? 1 : 2;
    for (int c : bc.components) {
      if (c < 0 || c > max_comp) throw ConfigError("boundary condition component out of range");
      for (int n : nodes) chosen[{static_cast<int>(bc.field), n, c}] = &bc;
    }
  }
  resolved_.clear();
  for (const auto& [key, bc] : chosen) {
    resolved_.push_back({static_cast<Field>(std::get<0>(key)), std::get<1>(key), std::get<2>(key), bc});
  }
}

FluidTimeScheme Solver::fluid_scheme() const {
  if (problem_.time.steady) return {};
  return FluidTimeScheme::transient(problem_.time.dt, problem_.time.theta);
}

SolidTimeScheme Solver::solid_scheme() const {
  if (problem_.time.steady) return {};
  return SolidTimeScheme::transient(problem_.time.dt, problem_.time.rho_inf);
}

void Solver::apply_dirichlet(FieldState& s, double t) const {
  for (const auto& r : resolved_) {
    const Vec2& X = mesh_of(problem_, r.field).nodes[r.node];
    set_value(s, r.field, r.node, r.component, r.bc->value(X, t, r.component));
  }
}

FieldState Solver::initial_state() const {
  const Problem& p = problem_;
  FieldState s;
  s.t = p.time.t0;
  auto init = [](FluidFields& f, int n) {
    f.u.assign(2 * n, 0.0);
    f.p.assign(n, 0.0);
    f.a.assign(2 * n, 0.0);
    f.valued.assign(n, 1);
  };
  if (p.background) init(s.background, p.background->num_nodes());
  if (p.patch) {
    init(s.patch, p.patch->num_nodes());
    s.d_grid.assign(2 * p.patch->num_nodes(), 0.0);
    s.u_grid.assign(2 * p.patch->num_nodes(), 0.0);
  }
  if (p.solid) {
    const int n = 2 * p.solid->num_nodes();
    s.d.assign(n, 0.0);
    s.v.assign(n, 0.0);
    s.a.assign(n, 0.0);
    s.c_sf2.assign(n, 0.0);
  }
  apply_dirichlet(s, s.t);
  if (p.solid) {
    if (!p.time.steady) {
      // Velocity/acceleration of prescribed solid motion from the time law.
      const double h = 0.01 * p.time.dt;
      for (const auto& r : resolved_) {
        if (r.field != Field::Solid) continue;
        const Vec2& X = p.solid->nodes[r.node];
        const double gm = r.bc->value(X, s.t - h, r.component), g0 = r.bc->value(X, s.t, r.component);
        const double gp = r.bc->value(X, s.t + h, r.component);
        s.v[2 * r.node + r.component] = (gp - gm) / (2.0 * h);
        s.a[2 * r.node + r.component] = (gp - 2.0 * g0 + gm) / (h * h);
      }
    }
    const Vector f = solid_internal_force(*p.solid, s.d, p.solid_params);
    s.f_int.assign(f.data(), f.data() + f.size());
  }
  if (motion_) {
    const Geometry g = geometry(s.d);
    s.d_grid = g.d_grid;
  }
  return s;
}

Geometry Solver::geometry(std::span<const double> d) const {
  const Problem& p = problem_;
  Geometry g;
  if (p.solid) {
    g.solid_coords = displaced_coordinates(*p.solid, d);
  }
  if (p.patch) {
    if (motion_) {
      std::vector<double> prescribed(2 * patch_fsi_nodes_.size(), 0.0);
      if (!d.empty()) {
        for (std::size_t i = 0; i < solid_partner_.size(); ++i) {
          prescribed[2 * i] = d[2 * solid_partner_[i]];
          prescribed[2 * i + 1] = d[2 * solid_partner_[i] + 1];
        }
      }
      const Vector dg = motion_->solve(prescribed);
      g.d_grid.assign(dg.data(), dg.data() + dg.size());
    } else {
      g.d_grid.assign(2 * p.patch->num_nodes(), 0.0);
    }
    g.patch_coords = displaced_coordinates(*p.patch, g.d_grid);
  }

  std::vector<Vec2> cutter;
  const std::vector<int>* loop = nullptr;
  const std::vector<Vec2>* loop_coords = nullptr;
  if (p.mode == Mode::Hybrid) {
    loop = &patch_ff_loop_;
    loop_coords = &g.patch_coords;
  } else if (p.mode == Mode::FixedGrid) {
    loop = &solid_fsi_loop_;
    loop_coords = &g.solid_coords;
  }
  if (loop) {
    for (std::size_t i = 0; i + 1 < loop->size(); ++i) cutter.push_back((*loop_coords)[(*loop)[i]]);
    if (polygon_signed_area(cutter) <= 0.0) throw GeometryError("interface loop is not counterclockwise");
    g.cut = classify_and_cut(*p.background, cutter, p.cut);
  }

  if (p.background) g.dofs.add_block(Field::Background, p.background->num_nodes(), 3, g.cut ? g.cut->active_node : std::vector<char>{});
  if (p.patch) g.dofs.add_block(Field::Patch, p.patch->num_nodes(), 3);
  if (p.solid) g.dofs.add_block(Field::Solid, p.solid->num_nodes(), 2);

  if (p.mode == Mode::Hybrid) {
    const auto edge_facets = loop_edge_facets(*p.patch, patch_ff_loop_);
    for (const auto& s : g.cut->segments) {
      const auto& bf = p.patch->boundary_facets[edge_facets[s.cutter_edge]];
      const double h = (g.patch_coords[bf.b] - g.patch_coords[bf.a]).norm();
      for (const auto& q : s.points) g.ff.push_back({q.x, q.w, s.normal, s.owner, bf.element, h});
    }
  }
  if (p.solid && p.patch) {
    const auto& rule = gauss_legendre(p.interface_points);
    for (int f : patch_fsi_facets_) {
      const auto& bf = p.patch->boundary_facets[f];
      const Vec2 xa = g.patch_coords[bf.a], xb = g.patch_coords[bf.b];
      const double len = (xb - xa).norm();
      const Vec2 n = Vec2((xb - xa).y(), -(xb - xa).x()) / len;
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double s = 0.5 * (1.0 + rule.points[q]);
        FluidSolidPoint pt;
        pt.x = xa + s * (xb - xa);
        pt.w = 0.5 * rule.weights[q] * len;
        pt.n = n;
        pt.fluid_element = bf.element;
        pt.solid_nodes = {patch_to_solid_[bf.a], patch_to_solid_[bf.b]};
        pt.solid_weights = {1.0 - s, s};
        pt.h = len;
        g.fs.push_back(pt);
      }
    }
  } else if (p.mode == Mode::FixedGrid) {
    const auto& c = g.cut->cutter;
    const std::size_t nc = c.size();
    for (const auto& s : g.cut->segments) {
      const int i = s.cutter_edge;
      const Vec2 ca = c[i], cb = c[(i + 1) % nc];
      const double h = element_diameter(p.background->corners(s.owner));
      for (const auto& q : s.points) {
        FluidSolidPoint pt;
        pt.x = q.x;
        pt.w = q.w;
        pt.n = s.normal;
        pt.fluid_element = s.owner;
        const double t = std::clamp((q.x - ca).dot(cb - ca) / (cb - ca).squaredNorm(), 0.0, 1.0);
        pt.solid_nodes = {solid_fsi_loop_[i], solid_fsi_loop_[i + 1]};
        pt.solid_weights = {1.0 - t, t};
        pt.h = h;
        g.fs.push_back(pt);
      }
    }
  }
  return g;
}

Vector Solver::solid_velocity(const FieldState& it, const FieldState& prev) const {
  const auto ts = solid_scheme();
  Vector v = Vector::Zero(static_cast<int>(it.d.size()));
  if (ts.steady) return v;
  for (std::size_t i = 0; i < it.d.size(); ++i) v[i] = ts.velocity(it.d[i], prev.d[i], prev.v[i], prev.a[i]);
  return v;
}

Assembled Solver::assemble(const Geometry& geo, const FieldState& it, const FieldState& lin,
                           const FieldState& prev, double t, bool with_matrix) const {
  const Problem& p = problem_;
  const auto fts = fluid_scheme();
  const auto sts = solid_scheme();
  Accumulator acc(geo.dofs.size(), with_matrix);

  FluidView bg, pv;
  if (p.background) {
    bg.mesh = &*p.background;
    bg.coords = p.background->nodes;
    bg.field = Field::Background;
    bg.dofs = &geo.dofs;
    bg.cut = geo.cut ? &*geo.cut : nullptr;
    bg.u = it.background.u;
    bg.p = it.background.p;
    bg.u_lin = lin.background.u;
    if (!fts.steady) {
      bg.u_prev = prev.background.u;
      bg.a_prev = prev.background.a;
    }
    assemble_fluid_domain(bg, p.fluid, fts, p.fluid_body, acc);
    if (bg.cut && p.fluid.ghost_penalty) assemble_ghost_penalty(bg, p.fluid, fts, acc);
  }
  Vector u_grid;
  if (p.patch) {
    pv.mesh = &*p.patch;
    pv.coords = geo.patch_coords;
    pv.field = Field::Patch;
    pv.dofs = &geo.dofs;
    pv.u = it.patch.u;
    pv.p = it.patch.p;
    pv.u_lin = lin.patch.u;
    if (!fts.steady) {
      pv.u_prev = prev.patch.u;
      pv.a_prev = prev.patch.a;
      if (motion_) {
        u_grid = grid_velocity(geo.d_grid, prev.d_grid, p.time.dt, p.time.theta,
                               p.time.grid_velocity_one_step_theta, prev.u_grid);
        pv.grid_velocity = std::span<const double>(u_grid.data(), u_grid.size());
      }
    }
    assemble_fluid_domain(pv, p.fluid, fts, p.fluid_body, acc);
  }
  if (p.mode == Mode::Hybrid) assemble_fluid_fluid(bg, pv, geo.ff, p.fluid, fts, p.coupling, acc);

  Assembled out;
  if (p.solid) {
    SolidView sv;
    sv.mesh = &*p.solid;
    sv.dofs = &geo.dofs;
    sv.d = it.d;
    if (!sts.steady) {
      sv.d_prev = prev.d;
      sv.v_prev = prev.v;
      sv.a_prev = prev.a;
      sv.f_int_prev = prev.f_int;
      sv.c_prev = prev.c_sf2;
    }
    assemble_solid(sv, p.solid_params, sts, acc);

    const Vector vs = solid_velocity(it, prev);
    SolidTrace st;
    st.dofs = &geo.dofs;
    st.velocity = std::span<const double>(vs.data(), vs.size());
    st.dv_dd = sts.dv_dd();
    out.c_sf2 = Vector::Zero(2 * p.solid->num_nodes());
    const FluidView& fv = p.mode == Mode::FixedGrid ? bg : pv;
    assemble_fluid_solid(fv, st, geo.fs, p.fluid, fts, p.coupling, acc, &out.c_sf2);
  }

  for (const auto& r : resolved_) {
    const int dof = geo.dofs.dof(r.field, r.node, r.component);
    if (dof < 0) continue;
    const Vec2& X = mesh_of(p, r.field).nodes[r.node];
    acc.set_dirichlet(dof, get_value(it, r.field, r.node, r.component) - r.bc->value(X, t, r.component));
  }
  out.residual = acc.residual();
  if (with_matrix) out.jacobian = acc.matrix();
  return out;
}

Vector Solver::pack(const Geometry& geo, const FieldState& s) const {
  Vector x = Vector::Zero(geo.dofs.size());
  auto fluid = [&](Field f, const FluidFields& ff) {
    const int n = static_cast<int>(ff.p.size());
    std::vector<double> nodal(3 * n);
    for (int i = 0; i < n; ++i) {
      nodal[3 * i] = ff.u[2 * i];
      nodal[3 * i + 1] = ff.u[2 * i + 1];
      nodal[3 * i + 2] = ff.p[i];
    }
    geo.dofs.pack(f, nodal, x);
  };
  if (geo.dofs.has(Field::Background)) fluid(Field::Background, s.background);
  if (geo.dofs.has(Field::Patch)) fluid(Field::Patch, s.patch);
  if (geo.dofs.has(Field::Solid)) geo.dofs.pack(Field::Solid, s.d, x);
  return x;
}

void Solver::unpack(const Geometry& geo, const Vector& x, FieldState& s) const {
  auto fluid = [&](Field f, FluidFields& ff) {
    const int n = static_cast<int>(ff.p.size());
    std::vector<double> nodal(3 * n);
    for (int i = 0; i < n; ++i) {
      nodal[3 * i] = ff.u[2 * i];
      nodal[3 * i + 1] = ff.u[2 * i + 1];
      nodal[3 * i + 2] = ff.p[i];
    }
    geo.dofs.unpack(f, x, nodal);
    for (int i = 0; i < n; ++i) {
      ff.u[2 * i] = nodal[3 * i];
      ff.u[2 * i + 1] = nodal[3 * i + 1];
      ff.p[i] = nodal[3 * i + 2];
    }
  };
  if (geo.dofs.has(Field::Background)) fluid(Field::Background, s.background);
  if (geo.dofs.has(Field::Patch)) fluid(Field::Patch, s.patch);
  if (geo.dofs.has(Field::Solid)) geo.dofs.unpack(Field::Solid, x, s.d);
}

void Solver::transcribe(const Geometry& geo, FluidFields& f, bool with_pressure) const {
  if (!problem_.background || f.p.empty()) return;
  const auto& nodes = problem_.background->nodes;
  const auto active = geo.background_active();
  std::vector<int> donors;
  for (int i = 0; i < static_cast<int>(f.valued.size()); ++i)
    if (f.valued[i]) donors.push_back(i);
  std::vector<int> fill;
  for (int i = 0; i < static_cast<int>(active.size()); ++i)
    if (active[i] && !f.valued[i]) fill.push_back(i);
  if (!fill.empty() && donors.empty()) throw AssemblyError("no valued background node to transcribe from");
  for (int i : fill) {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int j : donors) {
      const double d = (nodes[j] - nodes[i]).squaredNorm();
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    for (int c = 0; c < 2; ++c) {
      f.u[2 * i + c] = f.u[2 * best + c];
      f.a[2 * i + c] = f.a[2 * best + c];
    }
    if (with_pressure) f.p[i] = f.p[best];
  }
  f.valued = active;
}

StepReport Solver::advance(FieldState& state) const {
  const Problem& p = problem_;
  const NewtonOptions& no = p.newton;
  const bool steady = p.time.steady;
  const FieldState prev0 = state;
  const double t = steady ? state.t : state.t + p.time.dt;
  const auto sts = solid_scheme();

  StepReport rep;
  rep.t = t;

  // Predictor: constant solid velocity, fluid carried over.
  FieldState iterate = prev0;
  iterate.t = t;
  if (p.solid && !steady) {
    const auto& ga = sts.ga;
    const double dt = p.time.dt;
    for (std::size_t i = 0; i < iterate.d.size(); ++i) {
      const double a_new = -(1.0 - ga.gamma) / ga.gamma * prev0.a[i];
      iterate.d[i] = prev0.d[i] + dt * prev0.v[i] + dt * dt * ((0.5 - ga.beta) * prev0.a[i] + ga.beta * a_new);
    }
  }
  apply_dirichlet(iterate, t);
  if (motion_) {
    try {
      (void)geometry(iterate.d);
    } catch (const MeshDistortion& e) {
      spdlog::warn("predictor: {}; falling back to the previous displacement", e.what());
      iterate.d = prev0.d;
      apply_dirichlet(iterate, t);
      rep.predictor_fallback = true;
    }
  }

  std::array<double, 3> ref{-1.0, -1.0, -1.0};
  const bool solid_moves = p.solid && (motion_ || p.mode == Mode::FixedGrid);

  for (int cycle = 1; cycle <= no.max_cycles; ++cycle) {
    rep.cycles = cycle;
    Geometry geo = geometry(iterate.d);
    FieldState hist = prev0;
    transcribe(geo, hist.background, true);
    transcribe(geo, iterate.background, true);
    apply_dirichlet(iterate, t);

    Assembled A = assemble(geo, iterate, iterate, hist, t, true);
    bool increment_ok = false;
    bool changed = false;
    for (int it = 0;; ++it) {
      const auto rn = block_norms(geo.dofs, A.residual);
      rep.residual_history.push_back(A.residual.norm());
      if (ref[0] < 0.0)
        for (int b = 0; b < 3; ++b) ref[b] = rn[b];
      bool res_ok = true;
      for (int b = 0; b < 3; ++b) res_ok = res_ok && rn[b] <= std::max(no.abs_tol, no.rel_tol * ref[b]);
      bool tiny = true;
      for (int b = 0; b < 3; ++b) tiny = tiny && rn[b] <= no.abs_tol;
      if ((res_ok && increment_ok) || tiny) {
        // Converged: finalize the new level.
        FieldState out = iterate;
        const auto fts = fluid_scheme();
        auto fluid_acc = [&](FluidFields& f, const FluidFields& h) {
          for (std::size_t i = 0; i < f.u.size(); ++i) {
            f.a[i] = fts.steady ? 0.0 : fts.sigma() * (f.u[i] - h.u[i]) - fts.history_factor() * h.a[i];
          }
        };
        if (p.background) {
          fluid_acc(out.background, hist.background);
          out.background.valued = geo.background_active();
        }
        if (p.patch) fluid_acc(out.patch, hist.patch);
        if (p.solid) {
          for (std::size_t i = 0; i < out.d.size(); ++i) {
            if (steady) {
              out.v[i] = out.a[i] = 0.0;
            } else {
              const double a = sts.ga.acceleration(out.d[i], prev0.d[i], prev0.v[i], prev0.a[i], p.time.dt);
              out.v[i] = sts.ga.velocity(a, prev0.v[i], prev0.a[i], p.time.dt);
              out.a[i] = a;
            }
          }
          const Vector f = solid_internal_force(*p.solid, out.d, p.solid_params);
          out.f_int.assign(f.data(), f.data() + f.size());
          out.c_sf2.assign(A.c_sf2.data(), A.c_sf2.data() + A.c_sf2.size());
          for (int n = 0; n < p.solid->num_nodes(); ++n) rep.interface_force -= Vec2(A.c_sf2[2 * n], A.c_sf2[2 * n + 1]);
        }
        if (p.patch) {
          out.d_grid = geo.d_grid;
          if (motion_ && !steady) {
            const Vector ug = grid_velocity(geo.d_grid, prev0.d_grid, p.time.dt, p.time.theta,
                                            p.time.grid_velocity_one_step_theta, prev0.u_grid);
            out.u_grid.assign(ug.data(), ug.data() + ug.size());
          }
        }
        out.t = t;
        out.step = prev0.step + 1;
        state = std::move(out);
        return rep;
      }
      if (it >= no.max_iterations) {
        throw NonlinearDivergence("Newton did not converge in " + std::to_string(no.max_iterations) +
                                      " iterations at t = " + std::to_string(t),
                                  rep.residual_history);
      }
      const Vector dx = sparse_direct_solve(A.jacobian, -A.residual);
      const Vector x0 = pack(geo, iterate);
      const double r0 = A.residual.norm();
      double alpha = 1.0;
      FieldState trial;
      Geometry tgeo;
      Assembled At;
      for (int h = 0;; ++h) {
        trial = iterate;
        unpack(geo, x0 + alpha * dx, trial);
        bool ok = true;
        try {
          tgeo = solid_moves && trial.d != iterate.d ? geometry(trial.d) : geo;
          if (tgeo.dofs.size() != geo.dofs.size() || !(tgeo.dofs == geo.dofs)) {
            changed = true;
            break;
          }
          At = assemble(tgeo, trial, trial, hist, t, true);
        } catch (const MeshDistortion&) {
          if (h >= no.max_halvings) throw;
          ok = false;
        } catch (const ElementInversion&) {
          if (h >= no.max_halvings) throw;
          ok = false;
        }
        if (ok && (!no.line_search || At.residual.norm() < r0 || h >= no.max_halvings)) break;
        alpha *= 0.5;
        ++rep.halvings;
      }
      ++rep.iterations;
      if (changed) {
        iterate = std::move(trial);
        break;
      }
      const Vector step = alpha * dx;
      const auto dn = block_norms(geo.dofs, step);
      const auto xn = block_norms(geo.dofs, x0 + step);
      increment_ok = true;
      for (int b = 0; b < 3; ++b) increment_ok = increment_ok && dn[b] <= std::max(no.abs_tol, no.rel_tol * xn[b]);
      iterate = std::move(trial);
      geo = std::move(tgeo);
      A = std::move(At);
    }
    if (!changed) break;
    spdlog::debug("t = {}: active background set changed, starting cycle {}", t, cycle + 1);
  }
  throw NonlinearDivergence("active background set still changing after " + std::to_string(no.max_cycles) +
                                " cycles at t = " + std::to_string(t),
                            rep.residual_history);
}

}  // namespace hyfsi
