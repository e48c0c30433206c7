#pragma once

#include <optional>

#include "refold/manifold.hpp"

namespace refold {

// Planner over layered planar manifolds: every face carries a placement into
// the plane, all gluings are realized pointwise by the placements, and the
// union of placed faces covers the current footprint polygon twice (one proper
// and one mirrored sheet).

struct PlanarState {
  Manifold m;
  std::map<int, Isometry2> place;  // face id -> plane placement
  Polygon footprint;               // current polygon, collinear-free, CCW
};

// Planarity witness attached to each emitted step. After a rearrange's first
// step the interchange glues are realized only after folding one side across
// the axis; after the second step the placements realize every gluing.
struct Witness {
  std::map<int, Isometry2> placements;
  std::optional<Segment2> fold_axis;
};

struct StepRecord {
  RefoldStep step;
  AppliedStep applied;
  Witness witness;
  std::string provenance;
};

// A piece rearrangement: cut the footprint along `cut`, move the piece
// containing a1b1 by `motion`, and refold so the result covers the union.
// motion maps a1b1 onto a2b2 preserving order; there must also be a plane
// reflection doing the same. `reattach` lists extra contact curves (in final
// coordinates) where the moved piece meets the rest beyond a2b2.
struct RearrangeSpec {
  Segment2 a1b1, a2b2;
  Polyline2 cut;
  Isometry2 motion;
  std::vector<Polyline2> reattach;
};

// The exported view of a planar state.
struct DoubleCover {
  Polygon polygon;
  Manifold manifold;
};

PlanarState make_double_cover_state(const Polygon& polygon, const Tol& tol = {});
DoubleCover to_double_cover(const PlanarState& st);

// Checks that every gluing is realized pointwise by the placements, the
// footprint is simple, and the state covers it twice.
void verify_planar_state(const PlanarState& st, const Tol& tol = {});

// Checks a single witness against a manifold (placements realize all glues,
// possibly after folding one side across the axis).
bool witness_holds(const Manifold& m, const Witness& w, const Tol& tol = {});

// Core engine: emits exactly two refolding steps and advances the state.
std::vector<StepRecord> rearrange(PlanarState& st, const RearrangeSpec& spec,
                                  const std::string& provenance, const Tol& tol = {});

// Re-charts the state by a global isometry: placements and footprint move,
// the manifold itself is untouched.
void reposition(PlanarState& st, const Isometry2& iso);

// Rectangle produced by the triangle conversions: corner + base direction +
// outward normal + extents.
struct RectView {
  Point2 corner;
  Vec2 dir, normal;  // unit, normal = perp(dir) side of the rectangle body
  double base = 0, height = 0;
  Point2 at(double u, double v) const { return corner + dir * u + normal * v; }
};

// Replaces triangle ABC (consecutive footprint vertices, apex B whose foot on
// AC lies between A and C) by the equal-area rectangle with base AC.
RectView triangle_to_rectangle_acute(PlanarState& st, Point2 A, Point2 B, Point2 C,
                                     std::vector<StepRecord>& out, const Tol& tol = {});

// Replaces triangle ABC whose apex foot lies beyond C with |C foot| <= 4|AC|
// by the equal-area rectangle with base AC.
RectView triangle_to_rectangle_scalene(PlanarState& st, Point2 A, Point2 B, Point2 C,
                                       std::vector<StepRecord>& out, const Tol& tol = {});

// Reverse conversions: the footprint currently contains the rectangle with
// base AC on the apex side; they restore triangle ABC.
void rect_to_triangle_acute(PlanarState& st, Point2 A, Point2 B, Point2 C,
                            std::vector<StepRecord>& out, const Tol& tol = {});
void rect_to_triangle_scalene(PlanarState& st, Point2 A, Point2 B, Point2 C,
                              std::vector<StepRecord>& out, const Tol& tol = {});

// Halves a rectangle footprint: a x b -> (a/2) x 2b, stacking the right half
// on top. Returns the new view.
RectView halve_rectangle(PlanarState& st, const RectView& r,
                         std::vector<StepRecord>& out, const Tol& tol = {});

// Intersections of the extended neighbor edges with the line through B
// parallel to AC; returns which side attains the smaller |QB| (1 for the
// D1A side, 2 for the D2C side; ties prefer side 2) and the point.
std::pair<int, Point2> projection_bound(const Point2& D1, const Point2& A,
                                        const Point2& B, const Point2& C,
                                        const Point2& D2, const Tol& tol = {});

class PlanarPlanner {
 public:
  explicit PlanarPlanner(const Polygon& polygon, const Tol& tol = {});

  const PlanarState& state() const { return st_; }
  const std::vector<StepRecord>& records() const { return records_; }
  const Polygon& footprint() const { return st_.footprint; }

  // One vertex elimination (footprint must be convex with >= 4 vertices).
  // Returns the number of steps emitted.
  size_t eliminate_vertex();

  // Triangle footprint -> rectangle on its longest side.
  RectView triangle_to_rectangle();

  // Rectangle footprint -> square of the same area.
  size_t rectangle_to_square(RectView view);

  // Full pipeline: reduce to a triangle, then to the area square.
  void run_to_square();

  bool footprint_is_square() const;
  std::optional<RectView> footprint_as_rectangle() const;

 private:
  PlanarState st_;
  Tol tol_;
  std::vector<StepRecord> records_;
  int elimination_count_ = 0;
};

struct PlanarPlanSide {
  Polygon polygon;
  Manifold start;
  std::vector<StepRecord> records;
  Polygon final_footprint;
};

struct PlanarPlan {
  PlanarPlanSide p, q;
  double square_side = 0;
};

// Full pipeline: reduce both polygons to the common square; the combined
// refolding is side p forward followed by side q inverted in reverse order.
PlanarPlan plan_planar(const Polygon& polyP, const Polygon& polyQ, const Tol& tol = {});

}  // namespace refold
