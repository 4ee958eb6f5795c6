#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hyfsi/types.hpp"

namespace hyfsi {

// Open vertex list; the closing edge from back() to front() is implicit.
using Polygon = std::vector<Vec2>;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Shoelace area, positive for counterclockwise vertex order.
double polygon_signed_area(std::span<const Vec2> poly);
double polygon_perimeter(std::span<const Vec2> poly);

// Winding-number test; points on the boundary are reported as inside.
bool point_in_polygon(std::span<const Vec2> poly, const Vec2& p);

// Proper or touching intersection of segments [p0,p1] and [q0,q1]; returns
// the parameter along [p0,p1].
std::optional<double> segment_intersection(const Vec2& p0, const Vec2& p1,
                                           const Vec2& q0, const Vec2& q1);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

// True when two non-adjacent edges intersect.
bool polygon_self_intersects(std::span<const Vec2> poly);

// Triangle Gauss points on [(0,0),(1,0),(0,1)] as barycentric pairs
// (xi, eta) with weights summing to 1/2. Supported orders: 1, 2, >= 3 maps
// to the six-point degree-4 rule (positive weights only).
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
};
const TriangleRule& triangle_rule(int order);

// Ear-clipping triangulation of a simple polygon (either orientation);
// returns index triples into `poly`, each counterclockwise.
std::vector<std::array<int, 3>> triangulate_polygon(std::span<const Vec2> poly);

}  // namespace hyfsi
