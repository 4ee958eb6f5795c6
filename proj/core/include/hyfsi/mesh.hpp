#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hyfsi/types.hpp"

namespace hyfsi {

// Interior facet shared by two elements. The node pair (a, b) follows the
// counterclockwise orientation of `left`; `right` traverses it as (b, a).
struct InteriorFacet {
  int a = -1;
  int b = -1;
  int left = -1;
  int right = -1;
};

// Boundary facet owned by one element. (a, b) follow the counterclockwise
// orientation of `element`, so the outward normal is (b - a) rotated
// clockwise by 90 degrees. `local_edge` k joins local corners k and k+1.
struct BoundaryFacet {
  int a = -1;
  int b = -1;
  int element = -1;
  int local_edge = -1;
  std::string tag;
};

// Two-dimensional bilinear quadrilateral mesh. Elements list their four
// nodes counterclockwise. Objects are immutable after construction; moving
// meshes keep their reference coordinates here and carry current
// coordinates separately.
struct QuadMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 4>> elements;
  std::vector<InteriorFacet> interior_facets;
  std::vector<BoundaryFacet> boundary_facets;
  std::map<std::string, std::vector<int>> node_sets;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(elements.size()); }

  std::array<Vec2, 4> corners(int e) const;
  std::array<Vec2, 4> corners(int e, std::span<const Vec2> coords) const;

  // Sorted unique node ids touched by facets carrying `tag`.
  std::vector<int> tagged_nodes(const std::string& tag) const;
  std::vector<std::string> facet_tags() const;
  bool has_tag(const std::string& tag) const;
};

using FacetTagger = std::function<std::string(const Vec2& a, const Vec2& b)>;

// Builds facet connectivity from raw nodes/elements. Boundary facets receive
// the tag returned by `tagger` (evaluated on the facet end points).
QuadMesh build_mesh(std::vector<Vec2> nodes,
                    std::vector<std::array<int, 4>> elements,
                    const FacetTagger& tagger);

// Throws GeometryError if an invariant is violated: inverted corners,
// facets shared by more than two elements, or open boundary chains.
void validate_mesh(const QuadMesh& mesh);

double signed_area(const std::array<Vec2, 4>& quad);
double element_area(const QuadMesh& mesh, int e, std::span<const Vec2> coords);
// Largest distance between two corners.
double element_diameter(const std::array<Vec2, 4>& quad);

QuadMesh generate_structured_rect(const Vec2& origin, const Vec2& extent,
                                  int nx, int ny);

// Ring-shaped patch. Node (layer l, sector k) sits at angle
// angle_offset + 2*pi*k/n_circum. Layer thicknesses grow geometrically from
// the inner to the outer ring so that outermost/innermost == grading.
// Inner facets are tagged "fsi", outer facets "ff".
QuadMesh generate_annulus_patch(const Vec2& center, double r_inner,
                                double r_outer, int n_circum, int n_radial,
                                double grading,
                                double angle_offset = -0.25 * 3.14159265358979323846);

// All-quad disc: square core block blended into ring layers. Boundary nodes
// sit at the same angles as generate_annulus_patch with the same
// angle_offset, so a disc and an annulus with equal radius match node-wise.
// n_rings <= 0 picks a count giving roughly isotropic ring elements.
QuadMesh generate_disc_mesh(const Vec2& center, double r, int n_circum,
                            int n_rings = 0,
                            double angle_offset = -0.25 * 3.14159265358979323846);

// Tensor-product block grid. Interval i of `x_breaks` receives x_counts[i]
// cells whose widths grow geometrically by x_ratios[i] (last/first cell
// width; 1 = uniform). Cells inside blocks flagged by `is_hole(ix, iy)` go
// into `hole` instead of `grid`, which share nodes' coordinates exactly on
// the common boundary. Outer boundary facets of `grid` are tagged "ff",
// facets on the hole boundary "fsi"; every boundary facet of `hole` is
// tagged "fsi".
struct BlockGridSpec {
  std::vector<double> x_breaks;
  std::vector<double> y_breaks;
  std::vector<int> x_counts;
  std::vector<int> y_counts;
  std::vector<double> x_ratios;
  std::vector<double> y_ratios;
  std::function<bool(int, int)> is_hole;
};
struct BlockGrid {
  QuadMesh grid;
  QuadMesh hole;  // empty when no block is a hole
};
BlockGrid generate_block_grid(const BlockGridSpec& spec);

// Counterclockwise closed node loop (first id repeated last) formed by the
// facets tagged `tag`. Throws GeometryError for open or multi-component
// chains.
std::vector<int> boundary_polyline(const QuadMesh& mesh, const std::string& tag);
std::vector<int> boundary_polyline(const QuadMesh& mesh, const std::string& tag,
                                   std::span<const Vec2> coords);

// Point data for VTK output; vectors are written as 3-component fields.
struct VtkPointField {
  std::string name;
  int components = 1;  // 1 or 2
  std::vector<double> values;
};
void write_mesh_vtk(const std::string& path, const QuadMesh& mesh,
                    std::span<const Vec2> coords,
                    const std::vector<VtkPointField>& fields = {},
                    const std::vector<int>* element_mask = nullptr);

}  // namespace hyfsi
