#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hyfsi/fem.hpp"
#include "hyfsi/mesh.hpp"
#include "hyfsi/polygon.hpp"

namespace hyfsi {

enum class CellKind : std::uint8_t { Active, Cut, Void };

// One piece of the cutter polyline restricted to a background element.
// `normal` is the unit normal pointing from the physical background fluid
// into the cutter interior.
struct InterfaceSegment {
  Vec2 a;
  Vec2 b;
  int owner = -1;        // background element on the physical side
  int cutter_edge = -1;  // edge i joins cutter vertices i and i+1
  Vec2 normal;
  std::vector<QuadPoint> points;  // physical Gauss points, weights sum to |b - a|
  double length() const { return (b - a).norm(); }
};

struct CutOptions {
  int volume_order = 2;    // triangle rule order on cut pieces
  int interface_points = 2;  // Gauss points per interface segment
};

struct CutState {
  std::vector<CellKind> kind;                       // per background element
  std::vector<std::vector<QuadPoint>> volume_quadrature;  // physical points, CUT only
  std::vector<std::vector<Polygon>> pieces;         // physical pieces, CUT only
  std::vector<double> physical_area;                // per element
  std::vector<InterfaceSegment> segments;
  std::vector<int> gp_facets;                       // indices into interior_facets
  std::vector<char> active_node;                    // per background node
  Polygon cutter;                                   // cutter after perturbation
  int perturbed_vertices = 0;
  int dropped_segments = 0;
  int clipped_segments = 0;  // pieces outside the background mesh

  int count(CellKind k) const;
  bool same_active_set(const CutState& other) const { return active_node == other.active_node; }
};

// Part of a convex element outside the closed cutter polygon, returned as a
// set of trapezoids (possibly degenerate to triangles) that partition it.
std::vector<Polygon> clip_element(std::span<const Vec2> element, std::span<const Vec2> cutter);

// Triangulates each polygon and applies the triangle rule of the given order.
// Triangles with area below `min_area` are dropped.
std::vector<QuadPoint> triangulate_and_weight(const std::vector<Polygon>& polygons, int order,
                                              double min_area = 0.0);

// Splits every cutter edge at the background element boundaries.
std::vector<InterfaceSegment> interface_segments(const QuadMesh& background,
                                                 std::span<const Vec2> cutter,
                                                 int n_points = 2);

// Cutter is a closed polyline (an explicit repeated end point is allowed).
// Clockwise input is reoriented.
CutState classify_and_cut(const QuadMesh& background, std::span<const Vec2> cutter,
                          const CutOptions& options = {});

// Background elements and interface segments as legacy VTK polydata.
void write_cut_vtk(const std::string& path, const CutState& cut);

}  // namespace hyfsi
