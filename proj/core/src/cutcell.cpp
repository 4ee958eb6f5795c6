#include "hyfsi/cutcell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <fstream>

#include <spdlog/spdlog.h>

#include "hyfsi/locator.hpp"

namespace hyfsi {

namespace {

struct Line {
  Vec2 a;
  Vec2 b;
  double at(double x) const { return a.y() + (x - a.x()) * (b.y() - a.y()) / (b.x() - a.x()); }
  bool spans(double x0, double x1) const {
    return a.x() != b.x() && std::min(a.x(), b.x()) <= x0 && std::max(a.x(), b.x()) >= x1;
  }
};

Polygon prepare_cutter(std::span<const Vec2> input) {
  Polygon c(input.begin(), input.end());
  if (c.size() >= 2 && c.front() == c.back()) c.pop_back();
  if (c.size() < 3) throw GeometryError("cutter needs at least three distinct vertices");
  Vec2 lo = c[0], hi = c[0];
  for (const auto& p : c) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double scale = (hi - lo).norm();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if ((c[(i + 1) % c.size()] - c[i]).norm() <= 1e-14 * scale) {
      throw GeometryError("cutter has a zero-length edge at vertex " + std::to_string(i));
    }
  }
  const double area = polygon_signed_area(c);
  if (area == 0.0) throw GeometryError("cutter encloses zero area");
  if (area < 0.0) std::reverse(c.begin(), c.end());
  if (polygon_self_intersects(c)) throw GeometryError("cutter polyline self-intersects");
  return c;
}

// Pushes cutter vertices that sit (almost) on background nodes or edges
// away from the cutter interior.
int perturb_cutter(Polygon& c, const QuadMesh& mesh, const ElementLocator& loc) {
  const std::size_t n = c.size();
  int moved = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (int pass = 0; pass < 3; ++pass) {
      const Vec2& v = c[i];
      bool near = false;
      double h = 0.0;
      for (int e : loc.candidates(v, v)) {
        const auto q = mesh.corners(e);
        const double he = element_diameter(q);
        for (int k = 0; k < 4 && !near; ++k) {
          if (point_segment_distance(v, q[k], q[(k + 1) % 4]) < 1e-12 * he) {
            near = true;
            h = he;
          }
        }
        if (near) break;
      }
      if (!near) break;
      const Vec2 dp = v - c[(i + n - 1) % n];
      const Vec2 dn = c[(i + 1) % n] - v;
      const Vec2 out = Vec2(dp.y(), -dp.x()).normalized() + Vec2(dn.y(), -dn.x()).normalized();
      const Vec2 dir = out.norm() > 1e-12 ? out.normalized() : Vec2(dn.y(), -dn.x()).normalized();
      c[i] = v + 1e-10 * h * dir;
      if (pass == 0) ++moved;
    }
  }
  if (moved > 0) spdlog::debug("cutcell: perturbed {} cutter vertices off background nodes/edges", moved);
  return moved;
}

std::vector<Polygon> clip_convex(std::span<const Vec2> elem, std::span<const Vec2> cutter) {
  const std::size_t ne = elem.size(), nc = cutter.size();
  double xmin = elem[0].x(), xmax = elem[0].x();
  for (const auto& p : elem) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
  }
  std::vector<double> events;
  for (const auto& p : elem) events.push_back(p.x());
  for (const auto& p : cutter)
    if (p.x() > xmin && p.x() < xmax) events.push_back(p.x());
  for (std::size_t j = 0; j < nc; ++j) {
    const Vec2 &a = cutter[j], &b = cutter[(j + 1) % nc];
    if (std::max(a.x(), b.x()) < xmin || std::min(a.x(), b.x()) > xmax) continue;
    for (std::size_t k = 0; k < ne; ++k) {
      const Vec2 &p = elem[k], &q = elem[(k + 1) % ne];
      if (auto t = segment_intersection(a, b, p, q)) {
        const double x = a.x() + *t * (b.x() - a.x());
        if (x > xmin && x < xmax) events.push_back(x);
      }
    }
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  std::vector<Polygon> out;
  std::vector<std::pair<double, Line>> inside;
  for (std::size_t s = 0; s + 1 < events.size(); ++s) {
    const double x0 = events[s], x1 = events[s + 1];
    if (!(x1 > x0)) continue;
    const double xm = 0.5 * (x0 + x1);
    const Line* lower = nullptr;
    const Line* upper = nullptr;
    std::array<Line, 8> elines;
    int ecount = 0;
    for (std::size_t k = 0; k < ne; ++k) {
      Line l{elem[k], elem[(k + 1) % ne]};
      if (l.spans(x0, x1)) elines[ecount++] = l;
    }
    for (int k = 0; k < ecount; ++k) {
      const double y = elines[k].at(xm);
      if (!lower || y < lower->at(xm)) lower = &elines[k];
      if (!upper || y > upper->at(xm)) upper = &elines[k];
    }
    if (!lower || lower == upper) continue;
    const double ylo = lower->at(xm), yhi = upper->at(xm);

    int below = 0;
    inside.clear();
    for (std::size_t j = 0; j < nc; ++j) {
      Line l{cutter[j], cutter[(j + 1) % nc]};
      if (!l.spans(x0, x1)) continue;
      const double y = l.at(xm);
      if (y <= ylo) {
        ++below;
      } else if (y < yhi) {
        inside.emplace_back(y, l);
      }
    }
    std::sort(inside.begin(), inside.end(), [](const auto& u, const auto& v) { return u.first < v.first; });

    // Strip boundaries at both slab ends, clamped into the element and made
    // monotone so every trapezoid has non-negative area.
    const std::size_t nb = inside.size() + 2;
    std::vector<double> y0(nb), y1(nb);
    const double lo0 = lower->at(x0), lo1 = lower->at(x1);
    const double hi0 = std::max(lo0, upper->at(x0)), hi1 = std::max(lo1, upper->at(x1));
    y0[0] = lo0;
    y1[0] = lo1;
    for (std::size_t k = 0; k < inside.size(); ++k) {
      y0[k + 1] = std::clamp(inside[k].second.at(x0), y0[k], hi0);
      y1[k + 1] = std::clamp(inside[k].second.at(x1), y1[k], hi1);
    }
    y0[nb - 1] = hi0;
    y1[nb - 1] = hi1;
    for (std::size_t k = 0; k + 1 < nb; ++k) {
      if ((below + static_cast<int>(k)) % 2 == 1) continue;  // strip inside the cutter
      Polygon trap{Vec2(x0, y0[k]), Vec2(x1, y1[k]), Vec2(x1, y1[k + 1]), Vec2(x0, y0[k + 1])};
      if (polygon_signed_area(trap) > 0.0) out.push_back(std::move(trap));
    }
  }
  return out;
}

}  // namespace

int CutState::count(CellKind k) const {
  return static_cast<int>(std::count(kind.begin(), kind.end(), k));
}

std::vector<Polygon> clip_element(std::span<const Vec2> element, std::span<const Vec2> cutter) {
  const Polygon c = prepare_cutter(cutter);
  return clip_convex(element, c);
}

std::vector<QuadPoint> triangulate_and_weight(const std::vector<Polygon>& polygons, int order,
                                              double min_area) {
  const auto& rule = triangle_rule(order);
  std::vector<QuadPoint> pts;
  int dropped = 0;
  for (const auto& poly : polygons) {
    std::vector<std::array<int, 3>> tris;
    const int n = static_cast<int>(poly.size());
    bool convex = n >= 3;
    for (int i = 0; i < n && convex; ++i) {
      convex = cross(poly[(i + 1) % n] - poly[i], poly[(i + 2) % n] - poly[(i + 1) % n]) >= 0.0;
    }
    if (convex) {
      for (int i = 1; i + 1 < n; ++i) tris.push_back({0, i, i + 1});
    } else {
      tris = triangulate_polygon(poly);
    }
    for (const auto& t : tris) {
      const Vec2 &p0 = poly[t[0]], &p1 = poly[t[1]], &p2 = poly[t[2]];
      const double area = 0.5 * cross(p1 - p0, p2 - p0);
      if (area <= min_area) {
        if (area > 0.0) ++dropped;
        continue;
      }
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const Vec2& r = rule.points[q];
        pts.push_back({p0 + r.x() * (p1 - p0) + r.y() * (p2 - p0), rule.weights[q] * 2.0 * area});
      }
    }
  }
  if (dropped > 0) spdlog::debug("cutcell: dropped {} sliver triangles", dropped);
  return pts;
}

namespace {

std::vector<InterfaceSegment> segments_impl(const QuadMesh& mesh, const ElementLocator& loc,
                                            const Polygon& c, int n_points, int& dropped, int& clipped) {
  const auto& g = gauss_legendre(n_points);
  std::vector<InterfaceSegment> segs;
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = c[i], b = c[(i + 1) % n];
    const double L = (b - a).norm();
    const Vec2 normal = Vec2(-(b - a).y(), (b - a).x()) / L;
    const auto cand = loc.candidates(a.cwiseMin(b), a.cwiseMax(b));
    if (cand.empty()) {
      ++clipped;
      continue;
    }
    double hmin = std::numeric_limits<double>::max();
    std::vector<double> ts{0.0, 1.0};
    for (int e : cand) {
      const auto q = mesh.corners(e);
      hmin = std::min(hmin, element_diameter(q));
      for (int k = 0; k < 4; ++k) {
        if (auto t = segment_intersection(a, b, q[k], q[(k + 1) % 4])) ts.push_back(*t);
      }
    }
    std::sort(ts.begin(), ts.end());
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
      const double t0 = ts[k], t1 = ts[k + 1];
      if ((t1 - t0) * L < 1e-12 * hmin) {
        if (t1 > t0) ++dropped;
        continue;
      }
      InterfaceSegment s;
      s.a = a + t0 * (b - a);
      s.b = a + t1 * (b - a);
      s.cutter_edge = static_cast<int>(i);
      s.normal = normal;
      const Vec2 probe = 0.5 * (s.a + s.b) - 1e-8 * hmin * normal;
      for (int e : cand) {
        if (point_in_element(mesh.corners(e), probe)) {
          s.owner = e;
          break;
        }
      }
      if (s.owner < 0) {
        ++clipped;
        continue;
      }
      const double len = (t1 - t0) * L;
      for (std::size_t q = 0; q < g.points.size(); ++q) {
        const double t = 0.5 * (1.0 + g.points[q]);
        s.points.push_back({s.a + t * (s.b - s.a), 0.5 * g.weights[q] * len});
      }
      segs.push_back(std::move(s));
    }
  }
  return segs;
}

}  // namespace

std::vector<InterfaceSegment> interface_segments(const QuadMesh& background,
                                                 std::span<const Vec2> cutter, int n_points) {
  const Polygon c = prepare_cutter(cutter);
  const ElementLocator loc(background, background.nodes);
  int dropped = 0, clipped = 0;
  return segments_impl(background, loc, c, n_points, dropped, clipped);
}

CutState classify_and_cut(const QuadMesh& mesh, std::span<const Vec2> cutter_in,
                          const CutOptions& options) {
  const ElementLocator loc(mesh, mesh.nodes);
  CutState cut;
  cut.cutter = prepare_cutter(cutter_in);
  cut.perturbed_vertices = perturb_cutter(cut.cutter, mesh, loc);
  const Polygon& c = cut.cutter;
  const int ne = mesh.num_elements();
  const std::size_t nc = c.size();

  // Elements whose bounding box meets some cutter edge need clipping.
  std::vector<char> touched(ne, 0);
  for (std::size_t i = 0; i < nc; ++i) {
    const Vec2 &a = c[i], &b = c[(i + 1) % nc];
    for (int e : loc.candidates(a.cwiseMin(b), a.cwiseMax(b))) touched[e] = 1;
  }

  cut.kind.assign(ne, CellKind::Active);
  cut.pieces.assign(ne, {});
  cut.volume_quadrature.assign(ne, {});
  cut.physical_area.assign(ne, 0.0);
  for (int e = 0; e < ne; ++e) {
    const auto q = mesh.corners(e);
    const double area = signed_area(q);
    if (!touched[e]) {
      const Vec2 centroid = 0.25 * (q[0] + q[1] + q[2] + q[3]);
      const bool in = point_in_polygon(c, centroid);
      cut.kind[e] = in ? CellKind::Void : CellKind::Active;
      cut.physical_area[e] = in ? 0.0 : area;
      continue;
    }
    auto pieces = clip_convex(std::span<const Vec2>(q.data(), 4), c);
    double a = 0.0;
    for (const auto& p : pieces) a += polygon_signed_area(p);
    cut.physical_area[e] = a;
    if (a < 1e-14 * area) {
      cut.kind[e] = CellKind::Void;
    } else if (a > (1.0 - 1e-14) * area) {
      cut.kind[e] = CellKind::Active;
    } else {
      cut.kind[e] = CellKind::Cut;
    }
    cut.pieces[e] = std::move(pieces);
  }

  cut.segments = segments_impl(mesh, loc, c, options.interface_points, cut.dropped_segments,
                               cut.clipped_segments);
  if (cut.clipped_segments > 0) {
    spdlog::debug("cutcell: {} interface segments lie outside the background mesh", cut.clipped_segments);
  }
  if (cut.dropped_segments > 0) {
    spdlog::debug("cutcell: dropped {} interface segments shorter than 1e-12 h", cut.dropped_segments);
  }
  for (const auto& s : cut.segments) cut.kind[s.owner] = CellKind::Cut;

  for (int e = 0; e < ne; ++e) {
    if (cut.kind[e] == CellKind::Cut) {
      const double h = element_diameter(mesh.corners(e));
      cut.volume_quadrature[e] = triangulate_and_weight(cut.pieces[e], options.volume_order, 1e-14 * h * h);
    } else {
      cut.pieces[e].clear();
    }
  }

  for (std::size_t f = 0; f < mesh.interior_facets.size(); ++f) {
    const auto& fc = mesh.interior_facets[f];
    const CellKind l = cut.kind[fc.left], r = cut.kind[fc.right];
    if (l == CellKind::Void || r == CellKind::Void) continue;
    if (l == CellKind::Cut || r == CellKind::Cut) cut.gp_facets.push_back(static_cast<int>(f));
  }

  cut.active_node.assign(mesh.num_nodes(), 0);
  for (int e = 0; e < ne; ++e) {
    if (cut.kind[e] == CellKind::Void) continue;
    for (int v : mesh.elements[e]) cut.active_node[v] = 1;
  }
  return cut;
}

void write_cut_vtk(const std::string& path, const CutState& cut) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.precision(12);
  std::vector<Vec2> pts;
  std::vector<std::vector<int>> polys, lines;
  for (const auto& list : cut.pieces) {
    for (const auto& p : list) {
      std::vector<int> ids;
      for (const auto& v : p) {
        ids.push_back(static_cast<int>(pts.size()));
        pts.push_back(v);
      }
      polys.push_back(std::move(ids));
    }
  }
  for (const auto& s : cut.segments) {
    lines.push_back({static_cast<int>(pts.size()), static_cast<int>(pts.size()) + 1});
    pts.push_back(s.a);
    pts.push_back(s.b);
  }
  out << "# vtk DataFile Version 3.0\nhyfsi cut cells\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << pts.size() << " double\n";
  for (const auto& p : pts) out << p.x() << ' ' << p.y() << " 0\n";
  auto emit = [&](const char* key, const std::vector<std::vector<int>>& cells) {
    if (cells.empty()) return;
    std::size_t total = 0;
    for (const auto& c : cells) total += c.size() + 1;
    out << key << ' ' << cells.size() << ' ' << total << '\n';
    for (const auto& c : cells) {
      out << c.size();
      for (int i : c) out << ' ' << i;
      out << '\n';
    }
  };
  emit("POLYGONS", polys);
  emit("LINES", lines);
}

}  // namespace hyfsi
