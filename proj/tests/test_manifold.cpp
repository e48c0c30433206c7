#include <random>

#include "doctest.h"
#include "refold/manifold.hpp"

using namespace refold;

namespace {

Manifold unit_square_dc() { return double_cover({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

}  // namespace

TEST_CASE("validate recognizes basic shapes") {
  SUBCASE("doubly covered unit square") {
    Manifold m = unit_square_dc();
    auto rep = validate(m);
    CHECK(rep.structure_ok);
    CHECK(rep.connected);
    CHECK(rep.closed);
    CHECK(rep.area == doctest::Approx(2.0));
    CHECK(rep.boundary_length == doctest::Approx(0.0));
  }
  SUBCASE("single square face, no gluing") {
    Manifold m;
    m.faces.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    auto rep = validate(m);
    CHECK(rep.structure_ok);
    CHECK(rep.connected);
    CHECK(!rep.closed);
    CHECK(rep.area == doctest::Approx(1.0));
    CHECK(rep.boundary_length == doctest::Approx(4.0));
  }
  SUBCASE("two faces, no gluing: not connected") {
    Manifold m;
    m.faces.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    m.faces.push_back({1, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
    auto rep = validate(m);
    CHECK(!rep.connected);
  }
  SUBCASE("box surface") {
    Manifold m = box_surface(1, 2, 3);
    auto rep = validate(m);
    CHECK(rep.structure_ok);
    CHECK(rep.connected);
    CHECK(rep.closed);
    CHECK(rep.area == doctest::Approx(2 * (1 * 2 + 2 * 3 + 1 * 3)));
  }
}

TEST_CASE("empty step is the identity") {
  Manifold m = unit_square_dc();
  Manifold m2 = apply_step(m, RefoldStep{});
  CHECK(labeled_isomorphic(m, m2));
}

TEST_CASE("cutting every gluing disconnects a double cover") {
  Manifold m = unit_square_dc();
  RefoldStep step;
  for (const auto& g : m.gluing) step.cut_gluings.push_back({g.a});
  CHECK_THROWS_AS(apply_step(m, step), Error);
  try {
    apply_step(m, step);
  } catch (const Error& e) {
    CHECK(e.code == Err::CutDisconnects);
  }
}

TEST_CASE("glue errors") {
  Manifold m2;
  m2.faces.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  m2.faces.push_back({1, {{0, 0}, {2, 0}, {2, 1}, {0, 1}}});
  m2.gluing.push_back({{0, 0, 0.0, 1.0}, {1, 0, 0.0, 1.0}, true});
  CHECK(validate(m2).connected);

  SUBCASE("length mismatch") {
    RefoldStep bad;
    bad.glues.push_back({{0, 1, 0.0, 1.0}, {1, 2, 0.0, 2.0}, false});
    CHECK_THROWS_AS(apply_step(m2, bad), Error);
  }
  SUBCASE("target not free") {
    RefoldStep bad;
    bad.glues.push_back({{0, 0, 0.0, 1.0}, {1, 2, 0.0, 1.0}, false});
    try {
      apply_step(m2, bad);
      CHECK(false);
    } catch (const Error& e) {
      CHECK(e.code == Err::GlueTargetNotFree);
    }
  }
}

TEST_CASE("partial cut splits glued pairs") {
  Manifold m = unit_square_dc();
  RefoldStep step;
  step.cut_gluings.push_back({{0, 0, 0.25, 0.75}});
  AppliedStep applied;
  Manifold m2 = apply_step(m, step, &applied);
  auto rep = validate(m2);
  CHECK(rep.structure_ok);
  CHECK(rep.boundary_length == doctest::Approx(1.0));
  CHECK(applied.severed.size() == 1);
  CHECK(applied.severed[0].a.length() == doctest::Approx(0.5));
  // invert restores the closed manifold
  Manifold m3 = apply_step(m2, invert_step(applied));
  CHECK(labeled_isomorphic(m, m3));
}

TEST_CASE("interior cut splits a face and is invertible") {
  Manifold m = unit_square_dc();
  RefoldStep step;
  step.cut_interiors.push_back({0, {{0.5, 0}, {0.5, 1}}});
  AppliedStep applied;
  Manifold m2 = apply_step(m, step, &applied);
  CHECK(m2.faces.size() == 3);
  auto rep = validate(m2);
  CHECK(rep.structure_ok);
  CHECK(rep.connected);
  CHECK(rep.area == doctest::Approx(2.0));
  // the interior cut adds twice its length of boundary
  CHECK(rep.boundary_length == doctest::Approx(2.0));
  CHECK(applied.splits.size() == 1);
  CHECK(applied.splits[0].child_keep == 0);

  Manifold m3 = apply_step(m2, invert_step(applied));
  // merging the split children back restores the original labeling
  Manifold m4 = merge_faces(m3, applied.splits[0].child_keep, applied.splits[0].child_new);
  CHECK(labeled_isomorphic(m, m4));
}

TEST_CASE("cutting both layers along a chord disconnects") {
  // With no cross-gluing in place, the same chord cut in both layers of a
  // double cover separates it; the cut phase must reject this.
  Manifold m = unit_square_dc();
  RefoldStep step;
  step.cut_interiors.push_back({0, {{0.5, 0}, {0.5, 1}}});
  step.cut_interiors.push_back({1, {{0.5, 0}, {0.5, -1}}});
  try {
    apply_step(m, step);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code == Err::CutDisconnects);
  }
}

TEST_CASE("boundary bookkeeping across a step") {
  // boundary after = before - 2*glued + 2*cut
  Manifold m = unit_square_dc();
  RefoldStep step;
  step.cut_gluings.push_back({{0, 0, 0.0, 1.0}});
  step.cut_gluings.push_back({{0, 2, 0.0, 1.0}});
  step.glues.push_back({{0, 0, 0.0, 1.0}, {0, 2, 0.0, 1.0}, true});
  Manifold m2 = apply_step(m, step);
  auto rep = validate(m2);
  CHECK(rep.structure_ok);
  // cut 2.0, reglued 1.0: net boundary 2*2 - 2*1 = 2
  CHECK(rep.boundary_length == doctest::Approx(2.0));
}

TEST_CASE("labeled isomorphism") {
  Manifold m = unit_square_dc();
  CHECK(labeled_isomorphic(m, m));
  Manifold rect = double_cover({{0, 0}, {2, 0}, {2, 0.5}, {0, 0.5}});
  CHECK(!labeled_isomorphic(m, rect));
  // translating a face in its local frame is immaterial
  Manifold shifted = m;
  for (auto& p : shifted.face(0).polygon) p = p + Point2{3.5, -1.25};
  CHECK(labeled_isomorphic(m, shifted));
  // rotating too
  Isometry2 rot = Isometry2::rotation180({0.3, 0.8});
  Manifold rotated = m;
  rotated.face(1).polygon = rot(rotated.face(1).polygon);
  CHECK(labeled_isomorphic(m, rotated));
  // but renaming a face is not
  Manifold renamed = relabel_faces(m, {{1, 7}});
  CHECK(!labeled_isomorphic(m, renamed));
}

TEST_CASE("merge faces across a flat seam") {
  // two unit squares side by side glued along their shared edge
  Manifold m;
  m.faces.push_back({0, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  m.faces.push_back({1, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}});
  // edge 1 of face 0 (right side, (1,0)->(1,1)) to edge 3 of face 1 (left side)
  m.gluing.push_back({{0, 1, 0.0, 1.0}, {1, 3, 0.0, 1.0}, true});
  Manifold merged = merge_faces(m, 0, 1);
  CHECK(merged.faces.size() == 1);
  CHECK(merged.faces[0].id == 0);
  CHECK(polygon_area(merged.faces[0].polygon) == doctest::Approx(2.0));
  // straight seam endpoints are simplified away
  CHECK(merged.faces[0].polygon.size() == 4);
}

namespace {

// Seeded generator of random valid steps: severs random glued spans, cuts
// random chords, then reglues some of the freed boundary.
struct RandomStepResult {
  Manifold before, after;
  AppliedStep applied;
};

RandomStepResult random_step(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  Manifold m;
  if (u(rng) < 0.5) {
    double w = 0.5 + 2 * u(rng), h = 0.5 + 2 * u(rng);
    Polygon poly{{0, 0}, {w, 0}, {w + 0.3 * u(rng), h}, {0.2 * u(rng), h + 0.5}};
    m = double_cover(poly);
  } else {
    m = box_surface(0.5 + u(rng), 0.5 + u(rng), 0.5 + u(rng));
  }

  RefoldStep step;
  Manifold work = m;
  int cuts = 1 + static_cast<int>(u(rng) * 2);
  for (int c = 0; c < cuts; ++c) {
    if (work.gluing.empty()) break;
    size_t pick = static_cast<size_t>(u(rng) * static_cast<double>(work.gluing.size()));
    pick = std::min(pick, work.gluing.size() - 1);
    GluedPair g = work.gluing[pick];
    double len = g.a.length();
    double a = u(rng) * 0.4 * len;
    double b = len - u(rng) * 0.4 * len;
    RefoldStep trial;
    trial.cut_gluings.push_back({{g.a.face, g.a.edge, g.a.t0 + a, g.a.t0 + b}});
    try {
      Manifold next = apply_step(work, trial);
      step.cut_gluings.push_back(trial.cut_gluings[0]);
      work = next;
    } catch (const Error&) {
      // skip cuts that would disconnect
    }
  }
  // Maybe cut a chord through a face.
  if (u(rng) < 0.6 && !work.faces.empty()) {
    const Face& f = work.faces[0];
    size_t n = f.polygon.size();
    size_t e1 = 0, e2 = n / 2;
    Point2 p = f.polygon[e1] + (f.polygon[(e1 + 1) % n] - f.polygon[e1]) * 0.5;
    Point2 q = f.polygon[e2] + (f.polygon[(e2 + 1) % n] - f.polygon[e2]) * 0.5;
    RefoldStep trial;
    trial.cut_interiors.push_back({f.id, {p, q}});
    try {
      Manifold next = apply_step(work, trial);
      step.cut_interiors.push_back(trial.cut_interiors[0]);
      work = next;
    } catch (const Error&) {
    }
  }
  // Reglue part of the freed boundary; regluing what a cut freed is always
  // length compatible.
  {
    RefoldStep trial = step;
    AppliedStep probe;
    apply_step(m, trial, &probe);
    for (const auto& g : probe.severed) {
      if (u(rng) < 0.5) trial.glues.push_back({g.a, g.b, g.reversed});
    }
    for (const auto& rec : probe.splits) {
      for (const auto& gs : rec.seam_glue)
        if (u(rng) < 0.7) trial.glues.push_back(gs);
    }
    step = trial;
  }
  RandomStepResult out;
  out.before = m;
  out.after = apply_step(m, step, &out.applied);
  return out;
}

}  // namespace

TEST_CASE("random steps invert to the original manifold") {
  std::mt19937_64 rng(20240817);
  int done = 0;
  for (int trial = 0; trial < 250; ++trial) {
    RandomStepResult r = random_step(rng);
    Manifold back = apply_step(r.after, invert_step(r.applied));
    // merge any faces the forward step split
    for (auto it = r.applied.splits.rbegin(); it != r.applied.splits.rend(); ++it)
      back = merge_faces(back, it->child_keep, it->child_new);
    CHECK(labeled_isomorphic(r.before, back));
    ++done;
  }
  CHECK(done == 250);
}

TEST_CASE("area conservation under random steps") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    RandomStepResult r = random_step(rng);
    CHECK(std::abs(r.after.total_area() - r.before.total_area()) <=
          1e-9 * r.before.total_area());
  }
}

TEST_CASE("closedness propagates when glues consume all cut boundary") {
  for (int trial = 0; trial < 40; ++trial) {
    Manifold m = box_surface(1 + trial * 0.03, 1.2, 0.8);
    // cut one glued edge entirely and reglue it: still closed
    GluedPair g = m.gluing[static_cast<size_t>(trial) % m.gluing.size()];
    RefoldStep step;
    step.cut_gluings.push_back({g.a});
    step.glues.push_back({g.a, g.b, g.reversed});
    Manifold m2 = apply_step(m, step);
    CHECK(validate(m2).closed);
  }
}
