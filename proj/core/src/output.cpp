#include "hyfsi/output.hpp"

#include <spdlog/fmt/fmt.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "hyfsi/fem.hpp"
#include "hyfsi/locator.hpp"
#include "hyfsi/polygon.hpp"

namespace hyfsi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Evaluated {
  Vec2 u;
  double p;
};

std::optional<Evaluated> evaluate(const QuadMesh& mesh, std::span<const Vec2> coords, const FluidFields& f, int e,
                                  const Vec2& x) {
  const auto q = mesh.corners(e, coords);
  const auto xi = map_to_reference(q, x);
  if (!xi) return std::nullopt;
  const auto B = eval_basis(q, *xi, false, e);
  Evaluated out{Vec2::Zero(), 0.0};
  const auto& el = mesh.elements[e];
  for (int a = 0; a < 4; ++a) {
    const int n = el[a];
    out.u += B.N[a] * Vec2(f.u[2 * n], f.u[2 * n + 1]);
    out.p += B.N[a] * f.p[n];
  }
  return out;
}

std::string fmt_double(double v) { return std::isnan(v) ? std::string("nan") : fmt::format("{}", v); }

}  // namespace

LineCut sample_line_cut(const Solver& solver, const FieldState& state, const Geometry& geo, const Vec2& p0,
                        const Vec2& p1, int n) {
  if (n < 2) throw ConfigError("a line cut needs at least two samples");
  const Problem& p = solver.problem();
  LineCut out;
  out.t = state.t;

  std::optional<ElementLocator> patch_loc, bg_loc;
  if (p.patch) patch_loc.emplace(*p.patch, geo.patch_coords);
  if (p.background) bg_loc.emplace(*p.background, p.background->nodes);
  std::vector<Vec2> solid_outline;
  if (p.solid) {
    const auto loop = boundary_polyline(*p.solid, "fsi", geo.solid_coords);
    for (std::size_t i = 0; i + 1 < loop.size(); ++i) solid_outline.push_back(geo.solid_coords[loop[i]]);
  }
  const double L = (p1 - p0).norm();
  const double patch_tol = 1e-10;

  for (int i = 0; i < n; ++i) {
    LineSample s;
    const double r = static_cast<double>(i) / (n - 1);
    s.x = p0 + r * (p1 - p0);
    s.s = r * L;
    s.u = Vec2(kNaN, kNaN);
    s.p = kNaN;
    s.source = "outside";
    if (patch_loc) {
      const int e = patch_loc->locate(s.x, patch_tol);
      if (e >= 0) {
        if (auto v = evaluate(*p.patch, geo.patch_coords, state.patch, e, s.x)) {
          s.u = v->u;
          s.p = v->p;
          s.source = "patch";
          out.samples.push_back(std::move(s));
          continue;
        }
      }
    }
    if (!solid_outline.empty() && point_in_polygon(solid_outline, s.x)) {
      s.source = "solid";
      out.samples.push_back(std::move(s));
      continue;
    }
    if (bg_loc) {
      const int e = bg_loc->locate(s.x);
      if (e >= 0) {
        const bool inside_cutter = geo.cut && point_in_polygon(geo.cut->cutter, s.x);
        const bool dead = geo.cut && (geo.cut->kind[e] == CellKind::Void ||
                                      (geo.cut->kind[e] == CellKind::Cut && inside_cutter));
        if (dead) {
          s.source = "void";
        } else if (auto v = evaluate(*p.background, p.background->nodes, state.background, e, s.x)) {
          s.u = v->u;
          s.p = v->p;
          s.source = "background";
        }
      }
    }
    out.samples.push_back(std::move(s));
  }

  if (geo.cut && bg_loc) {
    const auto& poly = geo.cut->cutter;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Vec2& a = poly[k];
      const Vec2& b = poly[(k + 1) % poly.size()];
      const auto r = segment_intersection(p0, p1, a, b);
      if (!r) continue;
      InterfaceCrossing c;
      c.x = p0 + *r * (p1 - p0);
      c.s = *r * L;
      c.u_background = c.u_other = Vec2(kNaN, kNaN);
      c.jump = kNaN;
      // Lowest-id background element on the physical side of the crossing.
      for (int e : bg_loc->candidates(c.x, c.x)) {
        if (geo.cut->kind[e] == CellKind::Void) continue;
        if (!point_in_element(p.background->corners(e), c.x, 1e-10)) continue;
        if (auto v = evaluate(*p.background, p.background->nodes, state.background, e, c.x)) {
          c.u_background = v->u;
          break;
        }
      }
      if (p.mode == Mode::Hybrid && patch_loc) {
        const int e = patch_loc->locate(c.x, 1e-9);
        if (e >= 0) {
          if (auto v = evaluate(*p.patch, geo.patch_coords, state.patch, e, c.x)) c.u_other = v->u;
        }
        c.jump = (c.u_background - c.u_other).norm();
      }
      out.crossings.push_back(c);
    }
    std::sort(out.crossings.begin(), out.crossings.end(),
              [](const InterfaceCrossing& x, const InterfaceCrossing& y) { return x.s < y.s; });
    // A line through a cutter vertex meets both adjacent edges there.
    const auto last = std::unique(out.crossings.begin(), out.crossings.end(),
                                  [&](const InterfaceCrossing& x, const InterfaceCrossing& y) {
                                    return std::abs(y.s - x.s) <= 1e-12 * L;
                                  });
    out.crossings.erase(last, out.crossings.end());
  }
  return out;
}

void write_line_cut_csv(const std::string& path, const LineCut& cut) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "s,x,y,u1,u2,p,source\n";
  for (const auto& s : cut.samples) {
    out << fmt::format("{},{},{},{},{},{},{}\n", s.s, s.x.x(), s.x.y(), fmt_double(s.u.x()), fmt_double(s.u.y()),
                       fmt_double(s.p), s.source);
  }
}

void write_crossings_csv(const std::string& path, const LineCut& cut) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "s,x,y,u1_background,u2_background,u1_other,u2_other,jump\n";
  for (const auto& c : cut.crossings) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", c.s, c.x.x(), c.x.y(), fmt_double(c.u_background.x()),
                       fmt_double(c.u_background.y()), fmt_double(c.u_other.x()), fmt_double(c.u_other.y()),
                       fmt_double(c.jump));
  }
}

namespace {

void write_vector_block(std::ofstream& out, const std::string& name, const std::vector<double>& v) {
  out << "VECTORS " << name << " double\n";
  for (std::size_t i = 0; i + 1 < v.size(); i += 2) out << v[i] << ' ' << v[i + 1] << " 0\n";
}

void write_scalar_block(std::ofstream& out, const std::string& name, const std::vector<double>& v) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double x : v) out << x << '\n';
}

// Active quads plus the physical pieces of cut cells, with nodal values of
// the pieces interpolated from their parent element.
void write_cut_background(const std::string& path, const QuadMesh& mesh, const CutState* cut,
                          const FluidFields& f) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.precision(12);
  std::vector<Vec2> pts(mesh.nodes.begin(), mesh.nodes.end());
  std::vector<double> u(f.u.begin(), f.u.end()), p(f.p.begin(), f.p.end());
  std::vector<std::vector<int>> cells;
  std::vector<int> types, kinds;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const CellKind k = cut ? cut->kind[e] : CellKind::Active;
    if (k == CellKind::Void) continue;
    if (k == CellKind::Active) {
      const auto& el = mesh.elements[e];
      cells.push_back({el[0], el[1], el[2], el[3]});
      types.push_back(9);
      kinds.push_back(0);
      continue;
    }
    for (const auto& poly : cut->pieces[e]) {
      std::vector<int> ids;
      for (const auto& v : poly) {
        const auto val = evaluate(mesh, mesh.nodes, f, e, v);
        ids.push_back(static_cast<int>(pts.size()));
        pts.push_back(v);
        u.push_back(val ? val->u.x() : 0.0);
        u.push_back(val ? val->u.y() : 0.0);
        p.push_back(val ? val->p : 0.0);
      }
      cells.push_back(std::move(ids));
      types.push_back(7);
      kinds.push_back(1);
    }
  }
  out << "# vtk DataFile Version 3.0\nhyfsi background\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << pts.size() << " double\n";
  for (const auto& x : pts) out << x.x() << ' ' << x.y() << " 0\n";
  std::size_t total = 0;
  for (const auto& c : cells) total += c.size() + 1;
  out << "CELLS " << cells.size() << ' ' << total << '\n';
  for (const auto& c : cells) {
    out << c.size();
    for (int i : c) out << ' ' << i;
    out << '\n';
  }
  out << "CELL_TYPES " << cells.size() << '\n';
  for (int t : types) out << t << '\n';
  out << "CELL_DATA " << cells.size() << "\nSCALARS cut double 1\nLOOKUP_TABLE default\n";
  for (int k : kinds) out << k << '\n';
  out << "POINT_DATA " << pts.size() << '\n';
  write_vector_block(out, "u", u);
  write_scalar_block(out, "p", p);
}

}  // namespace

std::vector<std::string> write_snapshot(const std::string& dir, const std::string& stem, const Solver& solver,
                                        const FieldState& state, const Geometry& geo) {
  std::filesystem::create_directories(dir);
  const Problem& p = solver.problem();
  std::vector<std::string> files;
  auto path = [&](const std::string& kind) {
    files.push_back(fmt::format("{}_{}.vtk", kind, stem));
    return (std::filesystem::path(dir) / files.back()).string();
  };
  if (p.background) {
    write_cut_background(path("background"), *p.background, geo.cut ? &*geo.cut : nullptr, state.background);
  }
  if (p.patch) {
    write_mesh_vtk(path("patch"), *p.patch, geo.patch_coords,
                   {{"u", 2, state.patch.u}, {"p", 1, state.patch.p}, {"grid_displacement", 2, geo.d_grid}});
  }
  if (p.solid) {
    write_mesh_vtk(path("solid"), *p.solid, geo.solid_coords,
                   {{"displacement", 2, state.d}, {"velocity", 2, state.v}});
  }
  return files;
}

}  // namespace hyfsi
