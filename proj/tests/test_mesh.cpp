#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "hyfsi/fem.hpp"
#include "hyfsi/locator.hpp"
#include "hyfsi/mesh.hpp"
#include "hyfsi/polygon.hpp"

namespace hyfsi {
namespace {

double total_area(const QuadMesh& m) {
  double a = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) a += element_area(m, e, m.nodes);
  return a;
}

TEST(StructuredRect, SingleElement) {
  const auto m = generate_structured_rect({0, 0}, {1, 1}, 1, 1);
  EXPECT_EQ(m.num_elements(), 1);
  EXPECT_EQ(m.num_nodes(), 4);
  EXPECT_EQ(m.boundary_facets.size(), 4u);
  EXPECT_TRUE(m.interior_facets.empty());
  EXPECT_NO_THROW(validate_mesh(m));
}

TEST(StructuredRect, ElementCount) {
  const auto m = generate_structured_rect({0, 0}, {2.2, 0.41}, 225, 45);
  EXPECT_EQ(m.num_elements(), 10125);
  EXPECT_EQ(m.num_nodes(), 226 * 46);
}

TEST(StructuredRect, SharedFacet) {
  const auto m = generate_structured_rect({0, 0}, {2, 1}, 2, 1);
  ASSERT_EQ(m.interior_facets.size(), 1u);
  const auto& f = m.interior_facets[0];
  EXPECT_EQ(std::set<int>({f.left, f.right}), std::set<int>({0, 1}));
  EXPECT_NEAR(m.nodes[f.a].x(), 1.0, 1e-14);
  EXPECT_NEAR(m.nodes[f.b].x(), 1.0, 1e-14);
}

TEST(StructuredRect, AreaAndCounterclockwise) {
  const auto m = generate_structured_rect({-1, 2}, {3, 0.5}, 7, 3);
  EXPECT_NEAR(total_area(m), 1.5, 1e-13);
  for (int e = 0; e < m.num_elements(); ++e) EXPECT_GT(signed_area(m.corners(e)), 0.0);
}

TEST(StructuredRect, BoundaryFacetOrientation) {
  const auto m = generate_structured_rect({0, 0}, {1, 1}, 3, 3);
  const Vec2 c(0.5, 0.5);
  for (const auto& f : m.boundary_facets) {
    const Vec2 t = m.nodes[f.b] - m.nodes[f.a];
    const Vec2 n(t.y(), -t.x());
    const Vec2 mid = 0.5 * (m.nodes[f.a] + m.nodes[f.b]);
    EXPECT_GT(n.dot(mid - c), 0.0);
  }
}

TEST(Annulus, InnerSegments) {
  const auto m = generate_annulus_patch({0, 0}, 0.75, 1.5, 50, 4, 1.0);
  EXPECT_NO_THROW(validate_mesh(m));
  int inner = 0;
  double length = 0.0;
  for (const auto& f : m.boundary_facets)
    if (f.tag == "fsi") {
      ++inner;
      length += (m.nodes[f.b] - m.nodes[f.a]).norm();
    }
  EXPECT_EQ(inner, 50);
  EXPECT_NEAR(length, 2.0 * 50 * 0.75 * std::sin(std::numbers::pi / 50), 1e-12);
}

TEST(Annulus, UniformLayersWithUnitGrading) {
  const int n = 16;
  const auto m = generate_annulus_patch({0, 0}, 1.0, 2.0, n, 2, 1.0);
  std::set<long> radii;
  for (const auto& x : m.nodes) radii.insert(std::lround(x.norm() * 1e9));
  ASSERT_EQ(radii.size(), 3u);
  std::vector<double> r;
  for (long v : radii) r.push_back(v * 1e-9);
  EXPECT_NEAR(r[1] - r[0], r[2] - r[1], 1e-9);
}

TEST(Annulus, GradingRatio) {
  const auto m = generate_annulus_patch({0, 0}, 1.0, 2.0, 16, 3, 4.0);
  std::set<long> radii;
  for (const auto& x : m.nodes) radii.insert(std::lround(x.norm() * 1e9));
  std::vector<double> r;
  for (long v : radii) r.push_back(v * 1e-9);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_NEAR((r[3] - r[2]) / (r[1] - r[0]), 4.0, 1e-6);
}

TEST(Disc, RejectsCircumferenceNotDivisibleByFour) {
  EXPECT_THROW(generate_disc_mesh({0, 0}, 1.0, 50), ConfigError);
}

TEST(Disc, BoundaryFacets) {
  const auto m = generate_disc_mesh({0, 0}, 1.0, 8);
  EXPECT_EQ(m.boundary_facets.size(), 8u);
  EXPECT_NO_THROW(validate_mesh(m));
}

TEST(Disc, AreaApproximatesCircle) {
  const auto m = generate_disc_mesh({0.3, -0.2}, 1.0, 48);
  EXPECT_NEAR(total_area(m), std::numbers::pi, 0.02 * std::numbers::pi);
  for (int e = 0; e < m.num_elements(); ++e) EXPECT_GT(signed_area(m.corners(e)), 0.0);
}

TEST(Disc, BoundaryMatchesAnnulusInnerRing) {
  const auto disc = generate_disc_mesh({0, 0}, 0.75, 48);
  const auto ann = generate_annulus_patch({0, 0}, 0.75, 1.0, 48, 2, 1.0);
  const auto dl = boundary_polyline(disc, disc.boundary_facets.front().tag);
  const auto al = boundary_polyline(ann, "fsi");
  ASSERT_EQ(dl.size(), al.size());
  for (int a : al) {
    double best = 1e300;
    for (int d : dl) best = std::min(best, (disc.nodes[d] - ann.nodes[a]).norm());
    EXPECT_LT(best, 1e-12);
  }
}

TEST(BoundaryPolyline, AnnulusOuterLoop) {
  const int n = 24;
  const auto m = generate_annulus_patch({0, 0}, 0.5, 1.0, n, 2, 1.0);
  const auto loop = boundary_polyline(m, "ff");
  ASSERT_EQ(loop.size(), static_cast<size_t>(n + 1));
  EXPECT_EQ(loop.front(), loop.back());
  std::vector<Vec2> poly;
  for (size_t i = 0; i + 1 < loop.size(); ++i) poly.push_back(m.nodes[loop[i]]);
  EXPECT_GT(polygon_signed_area(poly), 0.0);
}

TEST(BoundaryPolyline, SingleElementCounterclockwise) {
  const auto m = generate_structured_rect({0, 0}, {1, 1}, 1, 1);
  auto all = build_mesh(m.nodes, m.elements, [](const Vec2&, const Vec2&) { return "wall"; });
  const auto l = boundary_polyline(all, "wall");
  ASSERT_EQ(l.size(), 5u);
  std::vector<Vec2> poly;
  for (int i = 0; i < 4; ++i) poly.push_back(all.nodes[l[i]]);
  EXPECT_NEAR(polygon_signed_area(poly), 1.0, 1e-14);
}

TEST(BoundaryPolyline, ReversedElementsStillCounterclockwise) {
  auto m = generate_structured_rect({0, 0}, {2, 1}, 2, 1);
  std::vector<std::array<int, 4>> rev(m.elements.rbegin(), m.elements.rend());
  auto r = build_mesh(m.nodes, rev, [](const Vec2&, const Vec2&) { return "wall"; });
  const auto l = boundary_polyline(r, "wall");
  std::vector<Vec2> poly;
  for (size_t i = 0; i + 1 < l.size(); ++i) poly.push_back(r.nodes[l[i]]);
  EXPECT_NEAR(polygon_signed_area(poly), 2.0, 1e-14);
}

TEST(BoundaryPolyline, InnerLoopOfAnnulusIsCounterclockwise) {
  const auto m = generate_annulus_patch({1, 1}, 0.5, 1.0, 16, 2, 1.0);
  const auto l = boundary_polyline(m, "fsi");
  std::vector<Vec2> poly;
  for (size_t i = 0; i + 1 < l.size(); ++i) poly.push_back(m.nodes[l[i]]);
  EXPECT_GT(polygon_signed_area(poly), 0.0);
}

TEST(BlockGrid, HoleSharesBoundary) {
  BlockGridSpec s;
  s.x_breaks = {0, 1, 2, 3};
  s.y_breaks = {0, 1, 2};
  s.x_counts = {2, 3, 2};
  s.y_counts = {2, 2};
  s.x_ratios = {1, 1, 2};
  s.y_ratios = {1, 1};
  s.is_hole = [](int ix, int iy) { return ix == 1 && iy == 0; };
  const auto g = generate_block_grid(s);
  EXPECT_EQ(g.hole.num_elements(), 6);
  EXPECT_EQ(g.grid.num_elements(), 7 * 4 - 6);
  EXPECT_NEAR(total_area(g.grid) + total_area(g.hole), 6.0, 1e-12);
  for (int n : g.hole.tagged_nodes("fsi")) {
    double best = 1e300;
    for (const auto& x : g.grid.nodes) best = std::min(best, (x - g.hole.nodes[n]).norm());
    if (g.hole.nodes[n].y() > 1e-12) EXPECT_EQ(best, 0.0);
  }
}

TEST(Validate, RejectsInvertedElement) {
  std::vector<Vec2> nodes{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 4>> els{{0, 3, 2, 1}};
  EXPECT_THROW(validate_mesh(build_mesh(nodes, els, [](const Vec2&, const Vec2&) { return "b"; })),
               GeometryError);
}

TEST(Locator, FindsLowestContainingElement) {
  const auto m = generate_structured_rect({0, 0}, {1, 1}, 4, 4);
  ElementLocator loc(m, m.nodes);
  EXPECT_EQ(loc.locate({0.1, 0.1}), 0);
  EXPECT_EQ(loc.locate({0.25, 0.1}), 0);
  EXPECT_EQ(loc.locate({0.9, 0.9}), 15);
  EXPECT_EQ(loc.locate({1.5, 0.5}), -1);
}

TEST(Locator, AgreesWithBruteForce) {
  const auto m = generate_annulus_patch({0, 0}, 0.5, 1.0, 20, 3, 2.0);
  ElementLocator loc(m, m.nodes);
  for (int i = 0; i < 200; ++i) {
    const Vec2 x(-1.1 + 2.2 * ((i * 37) % 200) / 200.0, -1.1 + 2.2 * ((i * 91) % 200) / 200.0);
    int brute = -1;
    for (int e = 0; e < m.num_elements() && brute < 0; ++e)
      if (point_in_element(m.corners(e), x)) brute = e;
    EXPECT_EQ(loc.locate(x), brute);
  }
}

}  // namespace
}  // namespace hyfsi
