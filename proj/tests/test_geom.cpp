#include <random>

#include "doctest.h"
#include "refold/geom.hpp"
#include "refold/polygon.hpp"

using namespace refold;

TEST_CASE("projection onto a line") {
  Line2 xaxis = Line2::through({0, 0}, {2, 0});
  CHECK(near(project({1, 2}, xaxis), {1, 0}));
  // a point already on the line projects to itself
  CHECK(near(project({0.7, 0}, xaxis), {0.7, 0}));
  // independent check via dot product: foot = a + ((p-a).d) d
  Point2 p{3, 2};
  Line2 l = Line2::through({0, 0}, {1, 0});
  Point2 expected = l.anchor + l.direction * dot(p - l.anchor, l.direction);
  CHECK(near(project(p, l), expected));
  CHECK(near(project(p, l), {3, 0}));
}

TEST_CASE("projection is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 200; ++i) {
    Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)};
    if (dist(a, b) < 1e-6) continue;
    Line2 l = Line2::through(a, b);
    Point2 p{u(rng), u(rng)};
    Point2 q = project(p, l);
    CHECK(dist(project(q, l), q) < 1e-9);
    // residual is perpendicular to the direction
    CHECK(std::abs(dot(p - q, l.direction)) < 1e-9);
  }
}

TEST_CASE("orientation predicate") {
  CHECK(orientation({0, 0}, {1, 0}, {0, 1}) == Orientation::Left);
  CHECK(orientation({0, 0}, {1, 0}, {2, 0}) == Orientation::Collinear);
  CHECK(orientation({0, 0}, {0, 1}, {1, 0}) == Orientation::Right);
}

TEST_CASE("orientation is antisymmetric under swaps") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5, 5);
  auto flip = [](Orientation o) {
    if (o == Orientation::Left) return Orientation::Right;
    if (o == Orientation::Right) return Orientation::Left;
    return Orientation::Collinear;
  };
  for (int i = 0; i < 300; ++i) {
    Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    Orientation o = orientation(a, b, c);
    CHECK(orientation(b, a, c) == flip(o));
    CHECK(orientation(a, c, b) == flip(o));
    CHECK(orientation(c, b, a) == flip(o));
  }
}

TEST_CASE("isometry from segment pair") {
  SUBCASE("identity") {
    Segment2 s{{0, 0}, {1, 0}};
    Isometry2 g = isometry_from_segment_pair(s, s, false);
    CHECK(g.is_identity());
  }
  SUBCASE("half turn") {
    Segment2 s1{{0, 0}, {1, 0}};
    Segment2 s2{{1, 0}, {0, 0}};
    Isometry2 g = isometry_from_segment_pair(s1, s2, false);
    CHECK(near(g({0, 0}), {1, 0}));
    CHECK(near(g({1, 0}), {0, 0}));
    // Rotation by 180 degrees about (0.5, 0)
    CHECK(near(g({0.5, 0.3}), {0.5, -0.3}));
    CHECK(g.det() == doctest::Approx(1.0));
  }
  SUBCASE("reflection across x=1") {
    Segment2 s1{{0, 0}, {0, 1}};
    Segment2 s2{{2, 0}, {2, 1}};
    Isometry2 g = isometry_from_segment_pair(s1, s2, true);
    CHECK(near(g({0, 0}), {2, 0}));
    CHECK(near(g({0, 1}), {2, 1}));
    CHECK(g.det() == doctest::Approx(-1.0));
    CHECK(near(g({1, 0.5}), {1, 0.5}));  // axis fixed
    Line2 axis = reflection_axis(g);
    CHECK(std::abs(axis.direction.x) < 1e-9);
  }
  SUBCASE("length mismatch is rejected") {
    CHECK_THROWS_AS(isometry_from_segment_pair({{0, 0}, {1, 0}}, {{0, 0}, {2, 0}}, false),
                    Error);
  }
}

TEST_CASE("isometries preserve pairwise distances") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-8, 8);
  for (int trial = 0; trial < 50; ++trial) {
    Point2 a1{u(rng), u(rng)}, b1{u(rng), u(rng)};
    if (dist(a1, b1) < 1e-3) continue;
    // random target segment of the same length
    Point2 a2{u(rng), u(rng)};
    double ang = u(rng);
    Point2 b2 = a2 + Point2{std::cos(ang), std::sin(ang)} * dist(a1, b1);
    bool improper = trial % 2 == 0;
    Isometry2 g = isometry_from_segment_pair({a1, b1}, {a2, b2}, improper);
    CHECK(g.valid());
    std::vector<Point2> pts;
    for (int i = 0; i < 10; ++i) pts.push_back({u(rng), u(rng)});
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j)
        CHECK(std::abs(dist(g(pts[i]), g(pts[j])) - dist(pts[i], pts[j])) < 1e-9);
    // composition with the inverse is the identity
    CHECK(g.compose(g.inverse()).is_identity());
  }
}

TEST_CASE("segment intersection") {
  CHECK(segments_intersect({{0, 0}, {2, 2}}, {{0, 2}, {2, 0}}));
  CHECK(!segments_intersect({{0, 0}, {1, 0}}, {{0, 1}, {1, 1}}));
  CHECK(segments_intersect({{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}));  // shared endpoint
  CHECK(!segments_cross({{0, 0}, {1, 0}}, {{1, 0}, {1, 1}}));
  CHECK(segments_cross({{0, 0}, {2, 0}}, {{1, -1}, {1, 1}}));
}

TEST_CASE("polygon basics") {
  Polygon square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(signed_area(square) == doctest::Approx(1.0));
  CHECK(is_ccw(square));
  CHECK(is_simple(square));
  CHECK(is_convex(square));
  CHECK(point_in_polygon({0.5, 0.5}, square) == PointSide::Inside);
  CHECK(point_in_polygon({0.5, 0.0}, square) == PointSide::Boundary);
  CHECK(point_in_polygon({1.5, 0.5}, square) == PointSide::Outside);

  Polygon bow{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  CHECK(!is_simple(bow));

  Polygon with_collinear{{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(remove_collinear(with_collinear).size() == 4);
  CHECK(is_convex(with_collinear));
}

TEST_CASE("triangulation tiles the polygon") {
  Polygon pent{{0, 0}, {2, 0}, {2.7, 1.5}, {1, 2.8}, {-0.7, 1.4}};
  auto tris = triangulate(pent);
  CHECK(tris.size() == pent.size() - 2);
  double sum = 0;
  for (const auto& t : tris) sum += polygon_area({t[0], t[1], t[2]});
  CHECK(sum == doctest::Approx(polygon_area(pent)));
  // sampled containment
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (const auto& t : tris) {
    for (int k = 0; k < 20; ++k) {
      double r1 = u(rng), r2 = u(rng);
      if (r1 + r2 > 1) {
        r1 = 1 - r1;
        r2 = 1 - r2;
      }
      Point2 p = t[0] + (t[1] - t[0]) * r1 + (t[2] - t[0]) * r2;
      CHECK(point_in_polygon(p, pent) != PointSide::Outside);
    }
  }
  // non-convex case
  Polygon ell{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  auto tl = triangulate(ell);
  double s2 = 0;
  for (const auto& t : tl) s2 += polygon_area({t[0], t[1], t[2]});
  CHECK(s2 == doctest::Approx(3.0));
}

TEST_CASE("convex clip") {
  Polygon a{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  Polygon b{{1, 1}, {3, 1}, {3, 3}, {1, 3}};
  Polygon c = convex_clip(a, b);
  CHECK(polygon_area(c) == doctest::Approx(1.0));
  Polygon d = convex_clip(a, Polygon{{5, 5}, {6, 5}, {6, 6}, {5, 6}});
  CHECK(d.empty());
}

TEST_CASE("split polygon along a chord") {
  Polygon square{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  auto [p1, p2] = split_polygon(square, {{1, 0}, {1, 2}});
  CHECK(polygon_area(p1) == doctest::Approx(2.0));
  CHECK(polygon_area(p2) == doctest::Approx(2.0));
  // polyline cut through the interior
  auto [q1, q2] = split_polygon(square, {{0.5, 0}, {1, 1}, {0.5, 2}});
  CHECK(polygon_area(q1) + polygon_area(q2) == doctest::Approx(4.0));
}

TEST_CASE("polygon congruence") {
  Polygon a{{0, 0}, {2, 0}, {2, 1}, {0, 1}};
  Polygon b{{5, 5}, {5, 7}, {4, 7}, {4, 5}};  // rotated copy
  CHECK(polygons_congruent(a, b));
  Polygon c{{0, 0}, {2, 0}, {2, 1.1}, {0, 1.1}};
  CHECK(!polygons_congruent(a, c));
  // mirror image of a scalene triangle
  Polygon t1{{0, 0}, {3, 0}, {0.5, 1}};
  Polygon t2{{0, 0}, {-3, 0}, {-0.5, 1}};
  CHECK(polygons_congruent(t1, t2));
}
