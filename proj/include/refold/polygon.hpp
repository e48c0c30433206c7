#pragma once

#include <array>
#include <optional>
#include <utility>

#include "refold/geom.hpp"

namespace refold {

using Polygon = std::vector<Point2>;

double signed_area(const Polygon& poly);
double polygon_area(const Polygon& poly);  // absolute value
Point2 polygon_centroid(const Polygon& poly);

bool is_ccw(const Polygon& poly);
bool is_simple(const Polygon& poly, const Tol& tol = {});

// Strict convexity after ignoring collinear vertices; rejects reflex turns.
bool is_convex(const Polygon& poly, const Tol& tol = {});

// Drops vertices whose incident edges are collinear (interior angle of 180
// degrees within tolerance) and coincident consecutive points.
Polygon remove_collinear(const Polygon& poly, const Tol& tol = {});

enum class PointSide { Inside, Boundary, Outside };
PointSide point_in_polygon(const Point2& p, const Polygon& poly, const Tol& tol = {});

// A point strictly inside an arbitrary simple polygon (ear centroid).
Point2 interior_point(const Polygon& poly, const Tol& tol = {});

// Fan/ear-clipping triangulation of a simple polygon. Collinear vertices are
// tolerated. Throws NonSimple when the polygon self-intersects.
std::vector<std::array<Point2, 3>> triangulate(const Polygon& poly, const Tol& tol = {});

// Clip a convex polygon by a convex polygon (Sutherland-Hodgman). Returns the
// intersection, possibly empty.
Polygon convex_clip(const Polygon& subject, const Polygon& convex_window,
                    const Tol& tol = {});

// Interior angle at vertex i compared via cosines; returns the cosine of the
// interior angle (monotone decreasing in the angle) without calling acos.
double interior_angle_cos(const Polygon& poly, size_t i);

// Perimeter positions. A boundary location is (edge index, arc length along
// that edge).
struct BoundaryPos {
  size_t edge = 0;
  double t = 0.0;
};

double edge_length(const Polygon& poly, size_t edge);
Point2 boundary_point(const Polygon& poly, const BoundaryPos& pos);

// Locates p on the polygon boundary within tolerance; snaps near-vertex hits
// to exact vertex parameters. Returns nullopt if p is not on the boundary.
std::optional<BoundaryPos> locate_on_boundary(const Polygon& poly, const Point2& p,
                                              const Tol& tol = {});

// Splits a simple polygon along a polyline whose endpoints lie on the
// boundary and whose interior stays strictly inside. Returns the two pieces;
// first piece is the one lying to the left of the first cut segment.
std::pair<Polygon, Polygon> split_polygon(const Polygon& poly,
                                          const Polyline2& cut,
                                          const Tol& tol = {});

bool polygons_congruent(const Polygon& a, const Polygon& b, const Tol& tol = {});

}  // namespace refold
