#include "hyfsi/polygon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace hyfsi {

double polygon_signed_area(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  double a = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * a;
}

double polygon_perimeter(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  double l = 0.0;
  for (std::size_t i = 0; i < n; ++i) l += (poly[(i + 1) % n] - poly[i]).norm();
  return l;
}

bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p) {
  const std::size_t n = poly.size();
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    if (point_segment_distance(p, a, b) == 0.0) return true;
    const double side = cross(b - a, p - a);
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && side > 0.0) ++winding;
    } else if (b.y() <= p.y() && side < 0.0) {
      --winding;
    }
  }
  return winding != 0;
}

std::optional<double> segment_intersection(const Vec2& p0, const Vec2& p1,
                                           const Vec2& q0, const Vec2& q1) {
  const Vec2 r = p1 - p0;
  const Vec2 s = q1 - q0;
  const double denom = cross(r, s);
  if (denom == 0.0) return std::nullopt;
  const Vec2 qp = q0 - p0;
  const double t = cross(qp, s) / denom;
  const double u = cross(qp, r) / denom;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double l2 = ab.squaredNorm();
  if (l2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / l2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

bool polygon_self_intersects(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segment_intersection(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) {
        return true;
      }
    }
  }
  return false;
}

const TriangleRule& triangle_rule(int order) {
  static const TriangleRule one{{Vec2(1.0 / 3.0, 1.0 / 3.0)}, {0.5}};
  static const TriangleRule two{
      {Vec2(1.0 / 6.0, 1.0 / 6.0), Vec2(2.0 / 3.0, 1.0 / 6.0), Vec2(1.0 / 6.0, 2.0 / 3.0)},
      {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0}};
  // Strang-Fix / Dunavant six-point rule, exact for degree 4.
  static const TriangleRule four = [] {
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    TriangleRule r;
    r.points = {Vec2(a, a), Vec2(1 - 2 * a, a), Vec2(a, 1 - 2 * a),
                Vec2(b, b), Vec2(1 - 2 * b, b), Vec2(b, 1 - 2 * b)};
    r.weights = {wa / 2, wa / 2, wa / 2, wb / 2, wb / 2, wb / 2};
    return r;
  }();
  if (order <= 1) return one;
  if (order == 2) return two;
  return four;
}

std::vector<std::array<int, 3>> triangulate_polygon(std::span<const Vec2> poly) {
  const int n = static_cast<int>(poly.size());
  std::vector<std::array<int, 3>> tris;
  if (n < 3) return tris;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (polygon_signed_area(poly) < 0.0) std::reverse(idx.begin(), idx.end());

  auto inside_tri = [&](const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    return cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 &&
           cross(a - c, p - c) >= 0.0;
  };

  int guard = 0;
  while (idx.size() > 3 && guard < 4 * n * n) {
    ++guard;
    const int m = static_cast<int>(idx.size());
    bool clipped = false;
    for (int i = 0; i < m; ++i) {
      const int ip = idx[(i + m - 1) % m], ic = idx[i], in = idx[(i + 1) % m];
      const Vec2 &a = poly[ip], &b = poly[ic], &c = poly[in];
      if (cross(b - a, c - b) <= 0.0) continue;  // reflex or flat
      bool ear = true;
      for (int j = 0; j < m && ear; ++j) {
        const int k = idx[j];
        if (k == ip || k == ic || k == in) continue;
        if (inside_tri(poly[k], a, b, c)) ear = false;
      }
      if (!ear) continue;
      tris.push_back({ip, ic, in});
      idx.erase(idx.begin() + i);
      clipped = true;
      break;
    }
    if (!clipped) {
      // Only collinear/degenerate vertices remain; drop one flat vertex.
      for (int i = 0; i < m; ++i) {
        const Vec2 &a = poly[idx[(i + m - 1) % m]], &b = poly[idx[i]], &c = poly[idx[(i + 1) % m]];
        if (cross(b - a, c - b) == 0.0) {
          idx.erase(idx.begin() + i);
          clipped = true;
          break;
        }
      }
      if (!clipped) break;
    }
  }
  if (idx.size() == 3) tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

}  // namespace hyfsi
