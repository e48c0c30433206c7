#include <cmath>
#include <random>

#include "doctest.h"
#include "refold/planar.hpp"

using namespace refold;

namespace {

// Replays a record list against the starting manifold and checks each step
// applies and each witness holds.
Manifold replay(const Manifold& start, const std::vector<StepRecord>& records) {
  Manifold m = start;
  for (const auto& rec : records) {
    m = apply_step(m, rec.step);
    CHECK(witness_holds(m, rec.witness));
    auto rep = validate(m);
    CHECK(rep.structure_ok);
    CHECK(rep.connected);
    CHECK(rep.closed);
  }
  return m;
}

Polygon regular_polygon(size_t n, double circumradius) {
  Polygon poly;
  for (size_t i = 0; i < n; ++i) {
    double a = 2 * M_PI * static_cast<double>(i) / static_cast<double>(n);
    poly.push_back({circumradius * std::cos(a), circumradius * std::sin(a)});
  }
  return poly;
}

// Valtr-style random convex polygon with exactly n vertices.
Polygon random_convex(std::mt19937_64& rng, size_t n, double size = 2.0) {
  std::uniform_real_distribution<double> u(0, 1);
  for (int attempt = 0; attempt < 400; ++attempt) {
    std::vector<double> xs(n), ys(n);
    for (size_t i = 0; i < n; ++i) {
      xs[i] = u(rng) * size;
      ys[i] = u(rng) * size;
    }
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double x0 = xs.front(), x1 = xs.back();
    double y0 = ys.front(), y1 = ys.back();
    std::vector<double> dx, dy;
    double lastTop = x0, lastBot = x0;
    for (size_t i = 1; i + 1 < n; ++i) {
      if (u(rng) < 0.5) {
        dx.push_back(xs[i] - lastTop);
        lastTop = xs[i];
      } else {
        dx.push_back(lastBot - xs[i]);
        lastBot = xs[i];
      }
    }
    dx.push_back(x1 - lastTop);
    dx.push_back(lastBot - x1);
    double lastL = y0, lastR = y0;
    for (size_t i = 1; i + 1 < n; ++i) {
      if (u(rng) < 0.5) {
        dy.push_back(ys[i] - lastL);
        lastL = ys[i];
      } else {
        dy.push_back(lastR - ys[i]);
        lastR = ys[i];
      }
    }
    dy.push_back(y1 - lastL);
    dy.push_back(lastR - y1);
    std::shuffle(dy.begin(), dy.end(), rng);
    std::vector<Vec2> vecs;
    for (size_t i = 0; i < n; ++i) vecs.push_back({dx[i], dy[i]});
    std::sort(vecs.begin(), vecs.end(), [](const Vec2& a, const Vec2& b) {
      return std::atan2(a.y, a.x) < std::atan2(b.y, b.x);
    });
    Polygon poly;
    Point2 cur{0, 0};
    for (const auto& v : vecs) {
      poly.push_back(cur);
      cur = cur + v;
    }
    Polygon clean = remove_collinear(poly);
    if (clean.size() == n && is_convex(clean) && polygon_area(clean) > 0.05)
      return clean;
  }
  throw std::runtime_error("failed to generate a random convex polygon");
}

}  // namespace

TEST_CASE("double cover state is a valid planar state") {
  PlanarState st = make_double_cover_state({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
  CHECK(st.m.faces.size() == 2);
  CHECK(validate(st.m).closed);
  verify_planar_state(st);
}

TEST_CASE("rearrange: halve a 2x1 rectangle into 1x2") {
  PlanarState st = make_double_cover_state({{0, 0}, {2, 0}, {2, 1}, {0, 1}});
  Manifold start = st.m;
  std::vector<StepRecord> recs;
  RectView r;
  r.corner = {0, 0};
  r.dir = {1, 0};
  r.normal = {0, 1};
  r.base = 2;
  r.height = 1;
  RectView nv = halve_rectangle(st, r, recs);
  CHECK(recs.size() == 2);
  CHECK(nv.base == doctest::Approx(1.0));
  CHECK(nv.height == doctest::Approx(2.0));
  // footprint is now congruent to a 1 x 2 rectangle
  CHECK(polygons_congruent(st.footprint, {{0, 0}, {1, 0}, {1, 2}, {0, 2}}));
  // replay equals the live manifold
  Manifold replayed = replay(start, recs);
  CHECK(labeled_isomorphic(replayed, st.m));
  // the result covers the target: merge the split pieces back and compare to
  // a directly built double cover of the tall rectangle
  Manifold merged = st.m;
  CHECK(merged.faces.size() == 4);
  // top sheet: faces with proper placement
  std::vector<int> proper, improper;
  for (const auto& f : merged.faces)
    (st.place.at(f.id).improper ? improper : proper).push_back(f.id);
  REQUIRE(proper.size() == 2);
  REQUIRE(improper.size() == 2);
  merged = merge_faces(merged, std::min(proper[0], proper[1]),
                       std::max(proper[0], proper[1]));
  merged = merge_faces(merged, std::min(improper[0], improper[1]),
                       std::max(improper[0], improper[1]));
  Manifold target = double_cover({{0, 0}, {1, 0}, {1, 2}, {0, 2}});
  CHECK(labeled_isomorphic(merged, target));
}

TEST_CASE("rearrange: identity motion keeps the polygon") {
  PlanarState st = make_double_cover_state({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  Polygon before = st.footprint;
  RearrangeSpec spec;
  spec.a1b1 = {{0, 0}, {1, 0}};
  spec.a2b2 = {{0, 0}, {1, 0}};
  spec.motion = Isometry2::identity();
  spec.cut = {{0.5, 0}, {0.5, 1}};
  std::vector<StepRecord> recs = rearrange(st, spec, "identity");
  CHECK(recs.size() == 2);
  CHECK(polygons_congruent(st.footprint, before));
  CHECK(validate(st.m).closed);
}

TEST_CASE("rearrange: square diagonal fold") {
  // Cut along the diagonal and swing the upper-right half around the corner
  // (1,0) by a quarter turn; it lands below the bottom edge, reattaching
  // along the freed part of that edge.
  PlanarState st = make_double_cover_state({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  RearrangeSpec spec;
  spec.a1b1 = {{1, 0}, {1, 0.5}};
  spec.a2b2 = {{1, 0}, {0.5, 0}};
  spec.motion = Isometry2::rotation({1, 0}, 0.0, 1.0);  // quarter turn ccw
  spec.cut = {{0, 1}, {1, 0}};
  spec.reattach = {{{0.5, 0}, {0, 0}}};
  std::vector<StepRecord> recs = rearrange(st, spec, "diag");
  CHECK(recs.size() == 2);
  CHECK(polygon_area(st.footprint) == doctest::Approx(1.0));
  CHECK(validate(st.m).closed);
  // the two triangles form one big triangle of area 1
  Polygon clean = remove_collinear(st.footprint);
  CHECK(clean.size() == 3);
  CHECK(polygons_congruent(clean, {{0, 1}, {0, -1}, {1, 0}}));
}

TEST_CASE("triangle to rectangle, worked example") {
  Polygon tri{{0, 0}, {2, 0}, {1, 2}};
  PlanarState st = make_double_cover_state(tri);
  Manifold start = st.m;
  std::vector<StepRecord> recs;
  RectView r = triangle_to_rectangle_acute(st, {0, 0}, {1, 2}, {2, 0}, recs);
  CHECK(r.base == doctest::Approx(2.0));
  CHECK(r.height == doctest::Approx(1.0));
  CHECK(polygons_congruent(st.footprint, {{0, 0}, {2, 0}, {2, 1}, {0, 1}}));
  CHECK(recs.size() == 4);  // two rearranges
  replay(start, recs);
}

TEST_CASE("triangle to rectangle, right angle at an end") {
  // projection of the apex falls on the base endpoint
  Polygon tri{{0, 0}, {1, 0}, {0, 1}};
  PlanarState st = make_double_cover_state(tri);
  std::vector<StepRecord> recs;
  RectView r = triangle_to_rectangle_acute(st, {0, 0}, {0, 1}, {1, 0}, recs);
  CHECK(r.height == doctest::Approx(0.5));
  CHECK(polygons_congruent(st.footprint, {{0, 0}, {1, 0}, {1, 0.5}, {0, 0.5}}));
  // only one rearrange needed: the apex foot is at the corner
  CHECK(recs.size() == 2);
}

TEST_CASE("triangle to rectangle rejects an outside foot") {
  Polygon tri{{0, 0}, {1, 0}, {3, 1}};
  PlanarState st = make_double_cover_state(tri);
  std::vector<StepRecord> recs;
  CHECK_THROWS_AS(triangle_to_rectangle_acute(st, {0, 0}, {3, 1}, {1, 0}, recs), Error);
}

TEST_CASE("rectangle back to triangle (acute)") {
  Polygon tri{{0, 0}, {2, 0}, {0.8, 1.6}};
  PlanarState st = make_double_cover_state(tri);
  Manifold start = st.m;
  std::vector<StepRecord> recs;
  triangle_to_rectangle_acute(st, {0, 0}, {0.8, 1.6}, {2, 0}, recs);
  rect_to_triangle_acute(st, {0, 0}, {0.8, 1.6}, {2, 0}, recs);
  CHECK(polygons_congruent(st.footprint, tri));
  replay(start, recs);
}

TEST_CASE("scalene triangle to rectangle and back") {
  SUBCASE("regular case") {
    Polygon tri{{0, 0}, {3, 2}, {1, 0}};
    PlanarState st = make_double_cover_state(tri);
    Manifold start = st.m;
    std::vector<StepRecord> recs;
    RectView r = triangle_to_rectangle_scalene(st, {0, 0}, {3, 2}, {1, 0}, recs);
    CHECK(r.base == doctest::Approx(1.0));
    CHECK(r.height == doctest::Approx(1.0));
    CHECK(recs.size() == 8);  // four rearranges
    CHECK(polygons_congruent(st.footprint, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
    rect_to_triangle_scalene(st, {0, 0}, {3, 2}, {1, 0}, recs);
    CHECK(polygons_congruent(st.footprint, tri));
    replay(start, recs);
  }
  SUBCASE("boundary ratio |CB1| = 4|AC|") {
    Polygon tri{{0, 0}, {5, 1}, {1, 0}};
    PlanarState st = make_double_cover_state(tri);
    std::vector<StepRecord> recs;
    RectView r = triangle_to_rectangle_scalene(st, {0, 0}, {5, 1}, {1, 0}, recs);
    CHECK(r.base == doctest::Approx(1.0));
    CHECK(polygon_area(st.footprint) == doctest::Approx(0.5));
  }
  SUBCASE("ratio beyond four is rejected") {
    Polygon tri{{0, 0}, {6, 1}, {1, 0}};
    PlanarState st = make_double_cover_state(tri);
    std::vector<StepRecord> recs;
    CHECK_THROWS_AS(triangle_to_rectangle_scalene(st, {0, 0}, {6, 1}, {1, 0}, recs),
                    Error);
  }
}

TEST_CASE("projection bound") {
  SUBCASE("unit square achieves equality") {
    // B the corner (0,0); A, C its neighbors; the far vertex on both sides
    Point2 D{1, 1}, A{0, 1}, B{0, 0}, C{1, 0};
    auto [side, Q] = projection_bound(D, A, B, C, D);
    CHECK(side == 2);
    CHECK(dist(Q, B) == doctest::Approx(std::sqrt(2.0)));
    CHECK(dist(A, C) == doctest::Approx(std::sqrt(2.0)));
    CHECK(near(Q, {1, -1}, Tol{1e-7}));
  }
  SUBCASE("bound holds on regular polygons") {
    for (size_t n = 5; n <= 9; ++n) {
      Polygon poly = regular_polygon(n, 1.0);
      Point2 D1 = poly[n - 2], A = poly[n - 1], B = poly[0], C = poly[1], D2 = poly[2];
      auto [side, Q] = projection_bound(D1, A, B, C, D2);
      (void)side;
      CHECK(dist(Q, B) <= dist(A, C) + 1e-9);
    }
  }
}

TEST_CASE("projection bound on random convex polygons") {
  std::mt19937_64 rng(424242);
  for (int trial = 0; trial < 400; ++trial) {
    size_t n = 4 + static_cast<size_t>(trial % 9);
    Polygon poly = random_convex(rng, n);
    // B = vertex with the largest interior angle
    size_t bi = 0;
    double best = 2;
    for (size_t i = 0; i < poly.size(); ++i) {
      double c = interior_angle_cos(poly, i);
      if (c < best) {
        best = c;
        bi = i;
      }
    }
    size_t m = poly.size();
    auto [side, Q] = projection_bound(poly[(bi + m - 2) % m], poly[(bi + m - 1) % m],
                                      poly[bi], poly[(bi + 1) % m], poly[(bi + 2) % m]);
    (void)side;
    CHECK(dist(Q, poly[bi]) <=
          dist(poly[(bi + m - 1) % m], poly[(bi + 1) % m]) + 1e-9);
  }
}

TEST_CASE("eliminate vertex on the unit square") {
  PlanarPlanner planner({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  size_t steps = planner.eliminate_vertex();
  CHECK(steps <= 12);
  Polygon tri = remove_collinear(planner.footprint());
  REQUIRE(tri.size() == 3);
  CHECK(polygon_area(tri) == doctest::Approx(1.0));
  // expected triangle (0,1), (1,-1), (1,1) up to rigid motion
  CHECK(polygons_congruent(tri, {{0, 1}, {1, -1}, {1, 1}}));
  // replay the records
  Manifold m = double_cover(Polygon{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  replay(m, planner.records());
}

TEST_CASE("eliminate vertex on a regular hexagon") {
  Polygon hex = regular_polygon(6, 1.0);
  PlanarPlanner planner(hex);
  size_t steps = planner.eliminate_vertex();
  CHECK(steps <= 12);
  Polygon after = remove_collinear(planner.footprint());
  CHECK(after.size() == 5);
  CHECK(is_convex(after));
  CHECK(polygon_area(after) == doctest::Approx(polygon_area(hex)));
}

TEST_CASE("triangle input cannot be eliminated") {
  PlanarPlanner planner({{0, 0}, {1, 0}, {0.5, 1}});
  CHECK_THROWS_AS(planner.eliminate_vertex(), Error);
}

TEST_CASE("rectangle to square") {
  SUBCASE("aspect 4") {
    PlanarPlanner planner({{0, 0}, {2, 0}, {2, 0.5}, {0, 0.5}});
    auto rect = planner.footprint_as_rectangle();
    REQUIRE(rect.has_value());
    size_t steps = planner.rectangle_to_square(*rect);
    CHECK(planner.footprint_is_square());
    CHECK(steps <= 8);
    CHECK(polygon_area(planner.footprint()) == doctest::Approx(1.0));
    replay(double_cover(Polygon{{0, 0}, {2, 0}, {2, 0.5}, {0, 0.5}}), planner.records());
  }
  SUBCASE("skinny rectangle") {
    PlanarPlanner planner({{0, 0}, {9, 0}, {9, 0.25}, {0, 0.25}});
    auto rect = planner.footprint_as_rectangle();
    REQUIRE(rect.has_value());
    planner.rectangle_to_square(*rect);
    CHECK(planner.footprint_is_square());
    CHECK(polygon_area(planner.footprint()) == doctest::Approx(2.25));
  }
  SUBCASE("mild aspect") {
    PlanarPlanner planner({{0, 0}, {3, 0}, {3, 2}, {0, 2}});
    auto rect = planner.footprint_as_rectangle();
    REQUIRE(rect.has_value());
    planner.rectangle_to_square(*rect);
    CHECK(planner.footprint_is_square());
    CHECK(polygon_area(planner.footprint()) == doctest::Approx(6.0));
  }
}

TEST_CASE("full pipeline on small polygons") {
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 6; ++trial) {
    size_t n = 4 + static_cast<size_t>(trial % 3);
    Polygon poly = random_convex(rng, n);
    PlanarPlanner planner(poly);
    planner.run_to_square();
    CHECK(planner.footprint_is_square());
    CHECK(polygon_area(planner.footprint()) == doctest::Approx(polygon_area(poly)));
    Manifold end = replay(double_cover(poly), planner.records());
    CHECK(validate(end).closed);
  }
}

TEST_CASE("plan between a square and a rectangle") {
  PlanarPlan plan = plan_planar({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                                {{0, 0}, {2, 0}, {2, 0.5}, {0, 0.5}});
  CHECK(plan.square_side == doctest::Approx(1.0));
  // square side needs no steps; rectangle side a few
  CHECK(plan.p.records.empty());
  CHECK(plan.q.records.size() <= 30);
  CHECK(polygons_congruent(plan.p.final_footprint, plan.q.final_footprint));
  replay(plan.q.start, plan.q.records);
}

TEST_CASE("plan rejects mismatched areas") {
  CHECK_THROWS_AS(plan_planar({{0, 0}, {1, 0}, {1, 1}, {0, 1}},
                              {{0, 0}, {2, 0}, {2, 2}, {0, 2}}),
                  Error);
}

TEST_CASE("plan between a heptagon and a pentagon") {
  std::mt19937_64 rng(31337);
  Polygon hept = random_convex(rng, 7);
  Polygon pent = random_convex(rng, 5);
  // scale the pentagon to the heptagon's area
  double k = std::sqrt(polygon_area(hept) / polygon_area(pent));
  for (auto& p : pent) p = p * k;
  PlanarPlan plan = plan_planar(hept, pent);
  CHECK(polygons_congruent(plan.p.final_footprint, plan.q.final_footprint));
  replay(plan.p.start, plan.p.records);
  replay(plan.q.start, plan.q.records);
}
