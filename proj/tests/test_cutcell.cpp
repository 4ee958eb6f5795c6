#include <gtest/gtest.h>

#include <random>

#include "hyfsi/cutcell.hpp"

namespace hyfsi {
namespace {

Polygon square(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

double pieces_area(const std::vector<Polygon>& pieces) {
  double a = 0.0;
  for (const auto& p : pieces) a += polygon_signed_area(p);
  return a;
}

double weight_sum(const std::vector<QuadPoint>& pts) {
  double s = 0.0;
  for (const auto& q : pts) s += q.w;
  return s;
}

TEST(ClassifyAndCut, SingleElementWithInnerSquare) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 1, 1);
  const auto cut = classify_and_cut(m, square(0.5, 0.5, 1.5, 1.5));
  ASSERT_EQ(cut.kind[0], CellKind::Cut);
  EXPECT_NEAR(cut.physical_area[0], 3.0, 1e-12);
  EXPECT_NEAR(weight_sum(cut.volume_quadrature[0]), 3.0, 1e-12);
}

TEST(ClassifyAndCut, CutterOutsideMesh) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 4, 4);
  const auto cut = classify_and_cut(m, square(5, 5, 6, 6));
  EXPECT_EQ(cut.count(CellKind::Active), 16);
  EXPECT_TRUE(cut.segments.empty());
  EXPECT_TRUE(cut.gp_facets.empty());
}

TEST(ClassifyAndCut, AlignedSquareAgainstPointInPolygonOracle) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 2, 2);
  const Polygon c = square(0, 0, 1, 1);
  const auto cut = classify_and_cut(m, c);
  // Oracle: an element whose centroid lies inside the cutter is void; the
  // others only touch the cutter on a shared edge or corner.
  for (int e = 0; e < m.num_elements(); ++e) {
    const auto q = m.corners(e);
    const Vec2 centroid = 0.25 * (q[0] + q[1] + q[2] + q[3]);
    if (point_in_polygon(c, centroid)) {
      EXPECT_EQ(cut.kind[e], CellKind::Void) << e;
    } else {
      EXPECT_NE(cut.kind[e], CellKind::Void) << e;
      EXPECT_NEAR(cut.physical_area[e], 1.0, 1e-8) << e;
    }
  }
  EXPECT_EQ(cut.kind[0], CellKind::Void);
  EXPECT_GT(cut.perturbed_vertices, 0);
  EXPECT_FALSE(cut.gp_facets.empty());
}

TEST(ClassifyAndCut, ClockwiseCutterIsReoriented) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 4, 4);
  auto c = square(0.3, 0.3, 1.3, 1.1);
  std::reverse(c.begin(), c.end());
  const auto cut = classify_and_cut(m, c);
  EXPECT_GT(polygon_signed_area(cut.cutter), 0.0);
  for (const auto& s : cut.segments) {
    const Vec2 mid = 0.5 * (s.a + s.b);
    EXPECT_TRUE(point_in_polygon(cut.cutter, mid + 1e-6 * s.normal));
  }
}

TEST(ClassifyAndCut, DegenerateCutterThrows) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 2, 2);
  EXPECT_THROW(classify_and_cut(m, Polygon{{0.5, 0.5}, {1.5, 0.5}}), GeometryError);
  EXPECT_THROW(classify_and_cut(m, Polygon{{0.5, 0.5}, {0.5, 0.5}, {1.5, 0.5}, {1, 1}}), GeometryError);
  EXPECT_THROW(classify_and_cut(m, Polygon{{0.5, 0.5}, {1.5, 1.5}, {1.5, 0.5}, {0.5, 1.5}}), GeometryError);
}

TEST(ClassifyAndCut, AreaConservation) {
  const auto m = generate_structured_rect({0, 0}, {3, 2}, 12, 8);
  const Polygon c{{0.41, 0.33}, {2.13, 0.52}, {2.57, 1.61}, {1.2, 1.07}, {0.62, 1.58}};
  const auto cut = classify_and_cut(m, c);
  double physical = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) {
    if (cut.kind[e] == CellKind::Active) physical += signed_area(m.corners(e));
    if (cut.kind[e] == CellKind::Cut) {
      physical += cut.physical_area[e];
      EXPECT_NEAR(weight_sum(cut.volume_quadrature[e]), cut.physical_area[e], 1e-12);
    }
    if (cut.kind[e] == CellKind::Void) EXPECT_TRUE(cut.volume_quadrature[e].empty());
  }
  EXPECT_NEAR(physical + polygon_signed_area(c), 6.0, 1e-10);
  double length = 0.0;
  for (const auto& s : cut.segments) length += s.length();
  EXPECT_NEAR(length, polygon_perimeter(c), 1e-10);
}

TEST(ClassifyAndCut, GhostPenaltyFacetsAndActiveNodes) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 10, 10);
  const Polygon c{{0.55, 0.47}, {1.43, 0.61}, {1.21, 1.52}, {0.63, 1.33}};
  const auto cut = classify_and_cut(m, c);
  std::vector<int> expected;
  for (int f = 0; f < static_cast<int>(m.interior_facets.size()); ++f) {
    const auto& fc = m.interior_facets[f];
    const auto l = cut.kind[fc.left], r = cut.kind[fc.right];
    if (l != CellKind::Void && r != CellKind::Void && (l == CellKind::Cut || r == CellKind::Cut))
      expected.push_back(f);
  }
  EXPECT_EQ(cut.gp_facets, expected);
  std::vector<char> active(m.num_nodes(), 0);
  for (int e = 0; e < m.num_elements(); ++e)
    if (cut.kind[e] != CellKind::Void)
      for (int n : m.elements[e]) active[n] = 1;
  EXPECT_EQ(cut.active_node, active);
}

TEST(ClassifyAndCut, EnlargingCutterNeverActivatesVoid) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 16, 16);
  auto star = [](double scale) {
    Polygon p;
    for (int k = 0; k < 10; ++k) {
      const double a = 2 * 3.141592653589793 * k / 10;
      const double r = scale * (k % 2 ? 0.45 : 0.7);
      p.emplace_back(1.0 + r * std::cos(a), 1.0 + r * std::sin(a));
    }
    return p;
  };
  const auto small = classify_and_cut(m, star(0.8));
  const auto large = classify_and_cut(m, star(1.1));
  for (int e = 0; e < m.num_elements(); ++e)
    if (small.kind[e] == CellKind::Void) EXPECT_EQ(large.kind[e], CellKind::Void) << e;
}

TEST(ClipElement, FullyContained) {
  const auto q = square(0, 0, 1, 1);
  EXPECT_TRUE(clip_element(q, square(-1, -1, 2, 2)).empty());
}

TEST(ClipElement, LeftHalfCovered) {
  const auto q = square(0, 0, 1, 1);
  const auto pieces = clip_element(q, square(-5, -5, 0.5, 5));
  ASSERT_FALSE(pieces.empty());
  EXPECT_NEAR(pieces_area(pieces), 0.5, 1e-14);
}

TEST(ClipElement, ConcaveNotchAgainstMonteCarlo) {
  const auto q = square(0, 0, 1, 1);
  // A V-shaped notch entering through the bottom edge.
  const Polygon notch{{0.2, -0.5}, {0.8, -0.5}, {0.7, 0.3}, {0.5, 0.1}, {0.35, 0.6}};
  const auto pieces = clip_element(q, notch);
  ASSERT_FALSE(pieces.empty());
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 2'000'000;
  int outside = 0;
  for (int i = 0; i < n; ++i)
    if (!point_in_polygon(notch, Vec2(u(rng), u(rng)))) ++outside;
  EXPECT_NEAR(pieces_area(pieces), static_cast<double>(outside) / n, 1e-3);
}

TEST(ClipElement, PiecesAreInsideElementAndOutsideCutter) {
  const auto q = square(0, 0, 1, 1);
  const Polygon c{{0.1, 0.2}, {0.9, 0.4}, {0.3, 0.5}, {0.8, 0.9}, {-0.2, 0.8}};
  for (const auto& piece : clip_element(q, c)) {
    Vec2 centroid = Vec2::Zero();
    for (const auto& p : piece) centroid += p / piece.size();
    EXPECT_FALSE(point_in_polygon(c, centroid));
    EXPECT_TRUE(point_in_polygon(q, centroid));
  }
}

TEST(TriangulateAndWeight, UnitSquareOrderTwo) {
  const auto pts = triangulate_and_weight({square(0, 0, 1, 1)}, 2);
  EXPECT_EQ(pts.size(), 6u);
  EXPECT_NEAR(weight_sum(pts), 1.0, 1e-14);
}

TEST(TriangulateAndWeight, CentroidRule) {
  const auto pts = triangulate_and_weight({Polygon{{0, 0}, {1, 0}, {0, 1}}}, 1);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_NEAR(pts[0].w, 0.5, 1e-15);
  EXPECT_NEAR(pts[0].x.x(), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(pts[0].x.y(), 1.0 / 3.0, 1e-15);
}

TEST(TriangulateAndWeight, LShape) {
  const Polygon l{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
  const auto pts = triangulate_and_weight({l}, 2);
  EXPECT_NEAR(weight_sum(pts), polygon_signed_area(l), 1e-12);
  EXPECT_NEAR(weight_sum(pts), 0.75, 1e-12);
  for (const auto& q : pts) EXPECT_GT(q.w, 0.0);
}

TEST(TriangulateAndWeight, IntegratesQuadraticExactly) {
  const Polygon l{{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
  double s = 0.0;
  for (const auto& q : triangulate_and_weight({l}, 2)) s += q.w * q.x.x() * q.x.y();
  // x*y over the unit square minus the upper-right quarter.
  EXPECT_NEAR(s, 0.25 - 0.25 * 0.75 * 0.75, 1e-14);
}

TEST(TriangleRule, WeightsSumToHalf) {
  for (int order : {1, 2, 3, 4}) {
    const auto& r = triangle_rule(order);
    double s = 0.0;
    for (double w : r.weights) s += w;
    EXPECT_NEAR(s, 0.5, 1e-15) << order;
  }
}

TEST(InterfaceSegments, InnerSquare) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 1, 1);
  const auto segs = interface_segments(m, square(0.5, 0.5, 1.5, 1.5));
  ASSERT_EQ(segs.size(), 4u);
  double length = 0.0;
  for (const auto& s : segs) {
    length += s.length();
    double w = 0.0;
    for (const auto& p : s.points) w += p.w;
    EXPECT_NEAR(w, s.length(), 1e-14);
  }
  EXPECT_NEAR(length, 4.0, 1e-14);
}

TEST(InterfaceSegments, SplitAtInteriorFacet) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 2, 1);
  const auto segs = interface_segments(m, square(0.5, 0.5, 1.5, 1.5));
  int bottom = 0;
  double length = 0.0;
  for (const auto& s : segs)
    if (s.cutter_edge == 0) {
      ++bottom;
      length += s.length();
    }
  EXPECT_EQ(bottom, 2);
  EXPECT_NEAR(length, 1.0, 1e-14);
}

TEST(InterfaceSegments, BottomEdgeNormalPointsIntoCutter) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 1, 1);
  for (const auto& s : interface_segments(m, square(0.5, 0.5, 1.5, 1.5))) {
    if (s.cutter_edge != 0) continue;
    EXPECT_NEAR(s.normal.x(), 0.0, 1e-15);
    EXPECT_NEAR(s.normal.y(), 1.0, 1e-15);
  }
}

TEST(CutSweep, RandomTranslationsKeepWeightsPositive) {
  const auto m = generate_structured_rect({0, 0}, {2, 2}, 8, 8);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  const Polygon base{{0.6, 0.6}, {1.4, 0.7}, {1.3, 1.4}, {1.0, 1.1}, {0.7, 1.35}};
  for (int i = 0; i < 100; ++i) {
    const Vec2 shift(u(rng), u(rng));
    Polygon c = base;
    for (auto& p : c) p += shift;
    const auto cut = classify_and_cut(m, c);
    for (const auto& pts : cut.volume_quadrature)
      for (const auto& q : pts) EXPECT_GT(q.w, 0.0);
  }
}

}  // namespace
}  // namespace hyfsi
