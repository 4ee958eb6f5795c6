#pragma once

#include <string>
#include <vector>

#include "hyfsi/driver.hpp"

namespace hyfsi {

// `source` is one of patch, background, solid, void, outside. Values are NaN
// unless the source is a fluid mesh.
struct LineSample {
  double s = 0.0;  // arc length from the first end point
  Vec2 x;
  Vec2 u;
  double p = 0.0;
  std::string source;
};

// Point where the line crosses the background cutter. In hybrid mode
// `u_other` is the patch velocity there; otherwise it is NaN.
struct InterfaceCrossing {
  double s = 0.0;
  Vec2 x;
  Vec2 u_background;
  Vec2 u_other;
  double jump = 0.0;
};

struct LineCut {
  double t = 0.0;
  std::vector<LineSample> samples;
  std::vector<InterfaceCrossing> crossings;
};

// Samples n >= 2 equidistant points on [p0, p1]. The patch takes precedence
// over the background wherever both cover a point, including points exactly
// on the patch boundary.
LineCut sample_line_cut(const Solver& solver, const FieldState& state, const Geometry& geo, const Vec2& p0,
                        const Vec2& p1, int n);

void write_line_cut_csv(const std::string& path, const LineCut& cut);
void write_crossings_csv(const std::string& path, const LineCut& cut);

// Writes <dir>/<kind>_<stem>.vtk for every mesh of the problem. The
// background is written with its cut cells replaced by the physical pieces.
// Returns the file names relative to `dir`.
std::vector<std::string> write_snapshot(const std::string& dir, const std::string& stem, const Solver& solver,
                                        const FieldState& state, const Geometry& geo);

}  // namespace hyfsi
