#include "hyfsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <unordered_map>

#include <Eigen/Geometry>
#include <spdlog/fmt/fmt.h>

#include "hyfsi/polygon.hpp"

namespace hyfsi {

namespace {

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

// Geometric sequence of n cell widths over [a, b] with last/first == ratio.
std::vector<double> graded_points(double a, double b, int n, double ratio) {
  std::vector<double> pts(n + 1);
  if (n == 1 || std::abs(ratio - 1.0) < 1e-14) {
    for (int i = 0; i <= n; ++i) pts[i] = a + (b - a) * i / n;
    return pts;
  }
  const double q = std::pow(ratio, 1.0 / (n - 1));
  double total = 0.0, w = 1.0;
  for (int i = 0; i < n; ++i, w *= q) total += w;
  pts[0] = a;
  w = 1.0;
  for (int i = 1; i <= n; ++i, w *= q) pts[i] = pts[i - 1] + (b - a) * w / total;
  pts[n] = b;
  return pts;
}

}  // namespace

std::array<Vec2, 4> QuadMesh::corners(int e) const { return corners(e, nodes); }

std::array<Vec2, 4> QuadMesh::corners(int e, std::span<const Vec2> coords) const {
  const auto& el = elements[e];
  return {coords[el[0]], coords[el[1]], coords[el[2]], coords[el[3]]};
}

std::vector<int> QuadMesh::tagged_nodes(const std::string& tag) const {
  std::set<int> ids;
  for (const auto& f : boundary_facets) {
    if (f.tag == tag) {
      ids.insert(f.a);
      ids.insert(f.b);
    }
  }
  return {ids.begin(), ids.end()};
}

std::vector<std::string> QuadMesh::facet_tags() const {
  std::set<std::string> tags;
  for (const auto& f : boundary_facets) tags.insert(f.tag);
  return {tags.begin(), tags.end()};
}

bool QuadMesh::has_tag(const std::string& tag) const {
  return std::any_of(boundary_facets.begin(), boundary_facets.end(),
                     [&](const BoundaryFacet& f) { return f.tag == tag; });
}

QuadMesh build_mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 4>> elements,
                    const FacetTagger& tagger) {
  QuadMesh mesh;
  mesh.nodes = std::move(nodes);
  mesh.elements = std::move(elements);

  struct Seen {
    int element;
    int local_edge;
    int count;
  };
  std::unordered_map<std::uint64_t, Seen> seen;
  std::vector<std::uint64_t> order;
  seen.reserve(mesh.elements.size() * 4);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int k = 0; k < 4; ++k) {
      const int a = mesh.elements[e][k], b = mesh.elements[e][(k + 1) % 4];
      const auto key = edge_key(a, b);
      auto it = seen.find(key);
      if (it == seen.end()) {
        seen.emplace(key, Seen{e, k, 1});
        order.push_back(key);
      } else {
        if (it->second.count >= 2) {
          throw GeometryError(fmt::format("facet ({}, {}) shared by more than two elements", a, b));
        }
        const auto& first = it->second;
        const auto& fe = mesh.elements[first.element];
        mesh.interior_facets.push_back(
            {fe[first.local_edge], fe[(first.local_edge + 1) % 4], first.element, e});
        it->second.count = 2;
      }
    }
  }
  for (const auto key : order) {
    const auto& s = seen.at(key);
    if (s.count != 1) continue;
    const auto& el = mesh.elements[s.element];
    const int a = el[s.local_edge], b = el[(s.local_edge + 1) % 4];
    mesh.boundary_facets.push_back(
        {a, b, s.element, s.local_edge, tagger ? tagger(mesh.nodes[a], mesh.nodes[b]) : "boundary"});
  }
  return mesh;
}

double signed_area(const std::array<Vec2, 4>& q) {
  return polygon_signed_area(std::span<const Vec2>(q.data(), 4));
}

double element_area(const QuadMesh& mesh, int e, std::span<const Vec2> coords) {
  return signed_area(mesh.corners(e, coords));
}

double element_diameter(const std::array<Vec2, 4>& q) {
  double d = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) d = std::max(d, (q[i] - q[j]).norm());
  return d;
}

void validate_mesh(const QuadMesh& mesh) {
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto q = mesh.corners(e);
    for (int k = 0; k < 4; ++k) {
      const Vec2 prev = q[(k + 3) % 4], cur = q[k], next = q[(k + 1) % 4];
      const double det = cross(next - cur, prev - cur);
      if (det <= 0.0) {
        throw GeometryError(fmt::format("element {} has non-positive corner Jacobian at corner {}", e, k));
      }
    }
  }
  std::map<int, int> degree;
  for (const auto& f : mesh.boundary_facets) {
    ++degree[f.a];
    ++degree[f.b];
  }
  for (const auto& [node, d] : degree) {
    if (d % 2 != 0) throw GeometryError(fmt::format("boundary chain open at node {}", node));
  }
}

QuadMesh generate_structured_rect(const Vec2& origin, const Vec2& extent, int nx, int ny) {
  if (nx < 1 || ny < 1) throw ConfigError("structured rectangle needs nx, ny >= 1");
  if (!(extent.x() > 0.0) || !(extent.y() > 0.0)) {
    throw ConfigError("structured rectangle needs positive extents");
  }
  std::vector<Vec2> nodes;
  nodes.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double x = (i == nx) ? origin.x() + extent.x() : origin.x() + extent.x() * i / nx;
      const double y = (j == ny) ? origin.y() + extent.y() : origin.y() + extent.y() * j / ny;
      nodes.emplace_back(x, y);
    }
  }
  std::vector<std::array<int, 4>> elements;
  elements.reserve(nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int n0 = j * (nx + 1) + i;
      elements.push_back({n0, n0 + 1, n0 + nx + 2, n0 + nx + 1});
    }
  }
  const double x0 = origin.x(), x1 = origin.x() + extent.x();
  const double y0 = origin.y(), y1 = origin.y() + extent.y();
  auto tagger = [=](const Vec2& a, const Vec2& b) -> std::string {
    if (a.x() == x0 && b.x() == x0) return "left";
    if (a.x() == x1 && b.x() == x1) return "right";
    if (a.y() == y0 && b.y() == y0) return "bottom";
    if (a.y() == y1 && b.y() == y1) return "top";
    return "boundary";
  };
  QuadMesh mesh = build_mesh(std::move(nodes), std::move(elements), tagger);
  return mesh;
}

QuadMesh generate_annulus_patch(const Vec2& center, double r_inner, double r_outer,
                                int n_circum, int n_radial, double grading,
                                double angle_offset) {
  if (!(r_inner > 0.0) || !(r_outer > r_inner)) {
    throw ConfigError("annulus needs 0 < r_inner < r_outer");
  }
  if (n_circum < 8) throw ConfigError("annulus needs n_circum >= 8");
  if (n_radial < 1) throw ConfigError("annulus needs n_radial >= 1");
  if (!(grading > 0.0)) throw ConfigError("annulus grading must be positive");

  const auto radii = graded_points(r_inner, r_outer, n_radial, grading);
  std::vector<Vec2> nodes;
  nodes.reserve((n_radial + 1) * n_circum);
  for (int l = 0; l <= n_radial; ++l) {
    for (int k = 0; k < n_circum; ++k) {
      const double t = angle_offset + 2.0 * std::numbers::pi * k / n_circum;
      nodes.push_back(center + radii[l] * Vec2(std::cos(t), std::sin(t)));
    }
  }
  std::vector<std::array<int, 4>> elements;
  for (int l = 0; l < n_radial; ++l) {
    for (int k = 0; k < n_circum; ++k) {
      const int kn = (k + 1) % n_circum;
      elements.push_back({l * n_circum + k, (l + 1) * n_circum + k, (l + 1) * n_circum + kn,
                          l * n_circum + kn});
    }
  }
  const double r_mid = 0.5 * (r_inner + r_outer);
  auto tagger = [=](const Vec2& a, const Vec2& b) -> std::string {
    const double r = (0.5 * (a + b) - center).norm();
    return r < r_mid ? "fsi" : "ff";
  };
  QuadMesh mesh = build_mesh(std::move(nodes), std::move(elements), tagger);
  return mesh;
}

QuadMesh generate_disc_mesh(const Vec2& center, double r, int n_circum, int n_rings,
                            double angle_offset) {
  if (n_circum < 4 || n_circum % 4 != 0) {
    throw ConfigError(fmt::format("disc mesh needs n_circum divisible by 4 (got {})", n_circum));
  }
  if (!(r > 0.0)) throw ConfigError("disc radius must be positive");
  const int m = n_circum / 4;               // core cells per side
  const double s = 0.4 * r;                 // core half width
  if (n_rings <= 0) {
    const double h_circ = 2.0 * std::numbers::pi * r / n_circum;
    n_rings = std::max(1, static_cast<int>(std::lround((r - s * std::numbers::sqrt2) / h_circ)));
  }

  // Core grid in its own frame, rotated so that the corner (s,-s) sits at
  // angle angle_offset (the first boundary node).
  const double rot = angle_offset + 0.25 * std::numbers::pi;
  const Eigen::Rotation2Dd R(rot);
  std::vector<Vec2> nodes;
  nodes.reserve((m + 1) * (m + 1) + n_rings * n_circum);
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= m; ++i) {
      const Vec2 p(-s + 2.0 * s * i / m, -s + 2.0 * s * j / m);
      nodes.push_back(center + R * p);
    }
  }
  auto core_id = [m](int i, int j) { return j * (m + 1) + i; };

  // Perimeter index k -> core boundary node id, counterclockwise from (s,-s).
  std::vector<int> ring0(n_circum);
  std::vector<Vec2> square_pts(n_circum);
  for (int k = 0; k < n_circum; ++k) {
    const int side = k / m, pos = k % m;
    int i = 0, j = 0;
    switch (side) {
      case 0: i = m; j = pos; break;
      case 1: i = m - pos; j = m; break;
      case 2: i = 0; j = m - pos; break;
      default: i = pos; j = 0; break;
    }
    ring0[k] = core_id(i, j);
    square_pts[k] = nodes[ring0[k]] - center;
  }

  std::vector<std::vector<int>> ring(n_rings + 1);
  ring[0] = ring0;
  for (int l = 1; l <= n_rings; ++l) {
    ring[l].resize(n_circum);
    const double t = static_cast<double>(l) / n_rings;
    for (int k = 0; k < n_circum; ++k) {
      const double ang = angle_offset + 2.0 * std::numbers::pi * k / n_circum;
      const Vec2 circ = r * Vec2(std::cos(ang), std::sin(ang));
      const Vec2 p = (l == n_rings) ? circ : (1.0 - t) * square_pts[k] + t * circ;
      ring[l][k] = static_cast<int>(nodes.size());
      nodes.push_back(center + p);
    }
  }

  std::vector<std::array<int, 4>> elements;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      elements.push_back({core_id(i, j), core_id(i + 1, j), core_id(i + 1, j + 1), core_id(i, j + 1)});
  for (int l = 0; l < n_rings; ++l) {
    for (int k = 0; k < n_circum; ++k) {
      const int kn = (k + 1) % n_circum;
      elements.push_back({ring[l][k], ring[l + 1][k], ring[l + 1][kn], ring[l][kn]});
    }
  }
  QuadMesh mesh = build_mesh(std::move(nodes), std::move(elements),
                             [](const Vec2&, const Vec2&) { return std::string("fsi"); });
  if (m % 2 == 0) mesh.node_sets["center"] = {core_id(m / 2, m / 2)};
  return mesh;
}

BlockGrid generate_block_grid(const BlockGridSpec& spec) {
  const std::size_t bx = spec.x_counts.size(), by = spec.y_counts.size();
  if (spec.x_breaks.size() != bx + 1 || spec.y_breaks.size() != by + 1 || bx == 0 || by == 0) {
    throw ConfigError("block grid: breakpoints and counts are inconsistent");
  }
  auto ratio = [](const std::vector<double>& r, std::size_t i) { return i < r.size() ? r[i] : 1.0; };
  std::vector<double> xs{spec.x_breaks[0]}, ys{spec.y_breaks[0]};
  std::vector<int> xblock, yblock;  // block index per cell column/row
  for (std::size_t i = 0; i < bx; ++i) {
    if (spec.x_counts[i] < 1) throw ConfigError("block grid: counts must be >= 1");
    const auto pts = graded_points(spec.x_breaks[i], spec.x_breaks[i + 1], spec.x_counts[i], ratio(spec.x_ratios, i));
    xs.insert(xs.end(), pts.begin() + 1, pts.end());
    xblock.insert(xblock.end(), spec.x_counts[i], static_cast<int>(i));
  }
  for (std::size_t i = 0; i < by; ++i) {
    if (spec.y_counts[i] < 1) throw ConfigError("block grid: counts must be >= 1");
    const auto pts = graded_points(spec.y_breaks[i], spec.y_breaks[i + 1], spec.y_counts[i], ratio(spec.y_ratios, i));
    ys.insert(ys.end(), pts.begin() + 1, pts.end());
    yblock.insert(yblock.end(), spec.y_counts[i], static_cast<int>(i));
  }
  const int nx = static_cast<int>(xs.size()) - 1, ny = static_cast<int>(ys.size()) - 1;

  auto build = [&](bool want_hole) {
    std::vector<int> id((nx + 1) * (ny + 1), -1);
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 4>> elements;
    auto node = [&](int i, int j) {
      int& slot = id[j * (nx + 1) + i];
      if (slot < 0) {
        slot = static_cast<int>(nodes.size());
        nodes.emplace_back(xs[i], ys[j]);
      }
      return slot;
    };
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const bool hole = spec.is_hole && spec.is_hole(xblock[i], yblock[j]);
        if (hole != want_hole) continue;
        elements.push_back({node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)});
      }
    }
    return std::make_pair(std::move(nodes), std::move(elements));
  };

  const double x0 = xs.front(), x1 = xs.back(), y0 = ys.front(), y1 = ys.back();
  auto outer_tagger = [=](const Vec2& a, const Vec2& b) -> std::string {
    const bool outer = (a.x() == x0 && b.x() == x0) || (a.x() == x1 && b.x() == x1) ||
                       (a.y() == y0 && b.y() == y0) || (a.y() == y1 && b.y() == y1);
    return outer ? "ff" : "fsi";
  };
  BlockGrid out;
  auto [gn, ge] = build(false);
  out.grid = build_mesh(std::move(gn), std::move(ge), outer_tagger);
  auto [hn, he] = build(true);
  if (!he.empty()) {
    out.hole = build_mesh(std::move(hn), std::move(he),
                          [](const Vec2&, const Vec2&) { return std::string("fsi"); });
  }
  return out;
}

std::vector<int> boundary_polyline(const QuadMesh& mesh, const std::string& tag) {
  return boundary_polyline(mesh, tag, mesh.nodes);
}

std::vector<int> boundary_polyline(const QuadMesh& mesh, const std::string& tag,
                                   std::span<const Vec2> coords) {
  std::map<int, std::vector<int>> adj;
  std::size_t n_facets = 0;
  for (const auto& f : mesh.boundary_facets) {
    if (f.tag != tag) continue;
    adj[f.a].push_back(f.b);
    adj[f.b].push_back(f.a);
    ++n_facets;
  }
  if (n_facets == 0) throw GeometryError("no boundary facets tagged '" + tag + "'");
  for (const auto& [node, nbrs] : adj) {
    if (nbrs.size() != 2) {
      throw GeometryError(fmt::format("boundary '{}' is not a single closed loop at node {}", tag, node));
    }
  }
  // Walk from the smallest id, stepping to the smaller neighbour first.
  std::vector<int> loop;
  const int start = adj.begin()->first;
  int prev = -1, cur = start;
  do {
    loop.push_back(cur);
    const auto& nb = adj.at(cur);
    const int next = (prev == -1) ? std::min(nb[0], nb[1]) : (nb[0] == prev ? nb[1] : nb[0]);
    prev = cur;
    cur = next;
  } while (cur != start && loop.size() <= n_facets);
  if (cur != start || loop.size() != n_facets) {
    throw GeometryError(fmt::format("boundary '{}' has more than one component", tag));
  }
  std::vector<Vec2> pts;
  pts.reserve(loop.size());
  for (int id : loop) pts.push_back(coords[id]);
  if (polygon_signed_area(pts) < 0.0) std::reverse(loop.begin() + 1, loop.end());
  loop.push_back(loop.front());
  return loop;
}

void write_mesh_vtk(const std::string& path, const QuadMesh& mesh, std::span<const Vec2> coords,
                    const std::vector<VtkPointField>& fields, const std::vector<int>* element_mask) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.precision(12);
  out << "# vtk DataFile Version 3.0\nhyfsi mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : coords) out << p.x() << ' ' << p.y() << " 0\n";
  std::vector<int> cells;
  for (int e = 0; e < mesh.num_elements(); ++e)
    if (!element_mask || (*element_mask)[e]) cells.push_back(e);
  out << "CELLS " << cells.size() << ' ' << cells.size() * 5 << '\n';
  for (int e : cells) {
    const auto& el = mesh.elements[e];
    out << "4 " << el[0] << ' ' << el[1] << ' ' << el[2] << ' ' << el[3] << '\n';
  }
  out << "CELL_TYPES " << cells.size() << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) out << "9\n";
  if (!fields.empty()) out << "POINT_DATA " << mesh.num_nodes() << '\n';
  for (const auto& f : fields) {
    if (f.components == 1) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) out << v << '\n';
    } else {
      out << "VECTORS " << f.name << " double\n";
      for (std::size_t i = 0; i + 1 < f.values.size(); i += 2)
        out << f.values[i] << ' ' << f.values[i + 1] << " 0\n";
    }
  }
}

}  // namespace hyfsi
