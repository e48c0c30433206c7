#include "refold/polygon.hpp"

#include <algorithm>
#include <array>

namespace refold {

double signed_area(const Polygon& poly) {
  double s = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

double polygon_area(const Polygon& poly) { return std::abs(signed_area(poly)); }

Point2 polygon_centroid(const Polygon& poly) {
  double a = 0.0, cx = 0.0, cy = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point2& p = poly[i];
    const Point2& q = poly[(i + 1) % n];
    double w = p.x * q.y - q.x * p.y;
    a += w;
    cx += (p.x + q.x) * w;
    cy += (p.y + q.y) * w;
  }
  a *= 0.5;
  if (std::abs(a) < 1e-300) return poly.empty() ? Point2{} : poly[0];
  return {cx / (6 * a), cy / (6 * a)};
}

bool is_ccw(const Polygon& poly) { return signed_area(poly) > 0; }

bool is_simple(const Polygon& poly, const Tol& tol) {
  size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i)
    if (near(poly[i], poly[(i + 1) % n], tol)) return false;
  for (size_t i = 0; i < n; ++i) {
    Segment2 si{poly[i], poly[(i + 1) % n]};
    for (size_t j = i + 1; j < n; ++j) {
      bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      Segment2 sj{poly[j], poly[(j + 1) % n]};
      if (adjacent) {
        // Adjacent edges may only share the common vertex.
        if (segments_cross(si, sj, tol)) return false;
      } else {
        if (segments_intersect(si, sj, tol)) return false;
      }
    }
  }
  return true;
}

bool is_convex(const Polygon& poly, const Tol& tol) {
  Polygon p = remove_collinear(poly, tol);
  size_t n = p.size();
  if (n < 3) return false;
  int sign = 0;
  for (size_t i = 0; i < n; ++i) {
    auto o = orientation(p[i], p[(i + 1) % n], p[(i + 2) % n], tol);
    if (o == Orientation::Collinear) return false;
    int s = o == Orientation::Left ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

Polygon remove_collinear(const Polygon& poly, const Tol& tol) {
  Polygon out;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point2& prev = poly[(i + n - 1) % n];
    const Point2& cur = poly[i];
    const Point2& next = poly[(i + 1) % n];
    if (near(cur, next, tol)) continue;
    if (orientation(prev, cur, next, tol) == Orientation::Collinear) continue;
    out.push_back(cur);
  }
  return out;
}

PointSide point_in_polygon(const Point2& p, const Polygon& poly, const Tol& tol) {
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i)
    if (point_on_segment(p, {poly[i], poly[(i + 1) % n]}, tol))
      return PointSide::Boundary;
  // Crossing number with a horizontal ray.
  bool inside = false;
  for (size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (xint > p.x) inside = !inside;
    }
  }
  return inside ? PointSide::Inside : PointSide::Outside;
}

static bool ear_ok(const Polygon& poly, const std::vector<size_t>& idx, size_t i,
                   const Tol& tol) {
  size_t n = idx.size();
  const Point2& a = poly[idx[(i + n - 1) % n]];
  const Point2& b = poly[idx[i]];
  const Point2& c = poly[idx[(i + 1) % n]];
  if (orientation(a, b, c, tol) != Orientation::Left) return false;
  for (size_t j = 0; j < n; ++j) {
    size_t v = idx[j];
    if (v == idx[(i + n - 1) % n] || v == idx[i] || v == idx[(i + 1) % n]) continue;
    const Point2& p = poly[v];
    if (orientation(a, b, p, tol) != Orientation::Right &&
        orientation(b, c, p, tol) != Orientation::Right &&
        orientation(c, a, p, tol) != Orientation::Right) {
      if (point_in_polygon(p, {a, b, c}, tol) != PointSide::Outside) return false;
    }
  }
  return true;
}

std::vector<std::array<Point2, 3>> triangulate(const Polygon& poly_in, const Tol& tol) {
  Polygon poly = poly_in;
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  if (!is_simple(poly, tol)) throw Error(Err::NonSimple, "polygon self-intersects");
  std::vector<size_t> idx(poly.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::array<Point2, 3>> tris;
  size_t guard = 0;
  while (idx.size() > 3) {
    if (++guard > poly.size() * poly.size() + 16)
      throw Error(Err::NonSimple, "ear clipping failed to make progress");
    bool clipped = false;
    for (size_t i = 0; i < idx.size(); ++i) {
      size_t n = idx.size();
      const Point2& a = poly[idx[(i + n - 1) % n]];
      const Point2& b = poly[idx[i]];
      const Point2& c = poly[idx[(i + 1) % n]];
      // Skip degenerate (collinear) corners; drop them instead.
      if (orientation(a, b, c, tol) == Orientation::Collinear) {
        idx.erase(idx.begin() + static_cast<long>(i));
        clipped = true;
        break;
      }
      if (ear_ok(poly, idx, i, tol)) {
        tris.push_back({a, b, c});
        idx.erase(idx.begin() + static_cast<long>(i));
        clipped = true;
        break;
      }
    }
    if (!clipped) throw Error(Err::NonSimple, "no ear found");
  }
  if (idx.size() == 3) {
    const Point2& a = poly[idx[0]];
    const Point2& b = poly[idx[1]];
    const Point2& c = poly[idx[2]];
    if (orientation(a, b, c, tol) != Orientation::Collinear) tris.push_back({a, b, c});
  }
  return tris;
}

Point2 interior_point(const Polygon& poly, const Tol& tol) {
  if (poly.size() < 3) throw Error(Err::InvalidInput, "degenerate polygon");
  try {
    auto tris = triangulate(poly, tol);
    if (!tris.empty()) {
      auto best = tris[0];
      double best_area = 0;
      for (const auto& t : tris) {
        double a = polygon_area({t[0], t[1], t[2]});
        if (a > best_area) {
          best_area = a;
          best = t;
        }
      }
      return {(best[0].x + best[1].x + best[2].x) / 3.0,
              (best[0].y + best[1].y + best[2].y) / 3.0};
    }
  } catch (const Error&) {
    // Sliver faces defeat ear clipping; the area centroid still serves.
  }
  return polygon_centroid(poly);
}

Polygon convex_clip(const Polygon& subject, const Polygon& window, const Tol& tol) {
  Polygon win = window;
  if (signed_area(win) < 0) std::reverse(win.begin(), win.end());
  Polygon out = subject;
  if (signed_area(out) < 0) std::reverse(out.begin(), out.end());
  size_t m = win.size();
  for (size_t e = 0; e < m && !out.empty(); ++e) {
    const Point2& a = win[e];
    const Point2& b = win[(e + 1) % m];
    Vec2 dir = b - a;
    auto inside = [&](const Point2& p) { return cross(dir, p - a) >= -tol.at(norm(dir)); };
    Polygon next;
    size_t n = out.size();
    for (size_t i = 0; i < n; ++i) {
      const Point2& p = out[i];
      const Point2& q = out[(i + 1) % n];
      bool pin = inside(p), qin = inside(q);
      if (pin) next.push_back(p);
      if (pin != qin) {
        double denom = cross(dir, q - p);
        if (std::abs(denom) > 1e-300) {
          double t = cross(dir, a - p) / denom;
          next.push_back(p + (q - p) * t);
        }
      }
    }
    out = next;
  }
  // Drop slivers.
  if (!out.empty()) {
    out = remove_collinear(out, tol);
    if (out.size() < 3 || polygon_area(out) <= tol.at(1.0)) out.clear();
  }
  return out;
}

double interior_angle_cos(const Polygon& poly, size_t i) {
  size_t n = poly.size();
  Vec2 u = poly[(i + n - 1) % n] - poly[i];
  Vec2 v = poly[(i + 1) % n] - poly[i];
  return dot(u, v) / (norm(u) * norm(v));
}

double edge_length(const Polygon& poly, size_t edge) {
  return dist(poly[edge], poly[(edge + 1) % poly.size()]);
}

Point2 boundary_point(const Polygon& poly, const BoundaryPos& pos) {
  const Point2& a = poly[pos.edge];
  const Point2& b = poly[(pos.edge + 1) % poly.size()];
  double len = dist(a, b);
  return a + (b - a) * (pos.t / len);
}

std::optional<BoundaryPos> locate_on_boundary(const Polygon& poly, const Point2& p,
                                              const Tol& tol) {
  size_t n = poly.size();
  double best_d = 1e300;
  BoundaryPos best;
  for (size_t e = 0; e < n; ++e) {
    const Point2& a = poly[e];
    const Point2& b = poly[(e + 1) % n];
    double len = dist(a, b);
    Vec2 d = (b - a) / len;
    double t = std::clamp(dot(p - a, d), 0.0, len);
    Point2 foot = a + d * t;
    double dd = dist(p, foot);
    if (dd < best_d) {
      best_d = dd;
      best = {e, t};
    }
  }
  double scale = 1.0;
  for (const auto& q : poly) scale = std::max(scale, std::max(std::abs(q.x), std::abs(q.y)));
  if (best_d > tol.at(scale)) return std::nullopt;
  // Snap to vertices.
  double len = edge_length(poly, best.edge);
  if (best.t <= tol.at(len)) best.t = 0.0;
  if (best.t >= len - tol.at(len)) {
    best.edge = (best.edge + 1) % n;
    best.t = 0.0;
  }
  return best;
}

std::pair<Polygon, Polygon> split_polygon(const Polygon& poly_in, const Polyline2& cut,
                                          const Tol& tol) {
  Polygon poly = poly_in;
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  if (cut.size() < 2) throw Error(Err::InvalidInput, "cut needs two points");
  auto p0 = locate_on_boundary(poly, cut.front(), tol);
  auto p1 = locate_on_boundary(poly, cut.back(), tol);
  if (!p0 || !p1) throw Error(Err::InvalidInput, "cut endpoints must be on the boundary");
  for (size_t i = 1; i + 1 < cut.size(); ++i)
    if (point_in_polygon(cut[i], poly, tol) != PointSide::Inside)
      throw Error(Err::InvalidInput, "cut interior leaves the polygon");

  // Boundary walk from one position to another, counterclockwise.
  size_t n = poly.size();
  auto walk = [&](const BoundaryPos& from, const BoundaryPos& to) {
    std::vector<Point2> pts;
    pts.push_back(boundary_point(poly, from));
    if (from.edge == to.edge && to.t > from.t + tol.at(edge_length(poly, from.edge))) {
      pts.push_back(boundary_point(poly, to));
      return pts;
    }
    size_t e = from.edge;
    for (size_t guard = 0; guard <= n; ++guard) {
      e = (e + 1) % n;
      pts.push_back(poly[e]);
      if (e == to.edge) {
        if (to.t > tol.at(edge_length(poly, e)))
          pts.push_back(boundary_point(poly, to));
        return pts;
      }
    }
    throw Error(Err::InvalidInput, "boundary walk failed");
  };

  // Piece A: boundary from cut-end to cut-start, then the cut forward.
  std::vector<Point2> chainA = walk(*p1, *p0);
  Polygon a(chainA.begin(), chainA.end());
  for (size_t i = 1; i + 1 < cut.size(); ++i) a.push_back(cut[i]);
  // Piece B: boundary from cut-start to cut-end, then the cut backward.
  std::vector<Point2> chainB = walk(*p0, *p1);
  Polygon b(chainB.begin(), chainB.end());
  for (size_t i = cut.size() - 2; i >= 1; --i) b.push_back(cut[i]);

  auto clean = [&](Polygon& g) {
    Polygon out;
    for (const auto& q : g)
      if (out.empty() || !near(out.back(), q, tol)) out.push_back(q);
    if (out.size() > 1 && near(out.front(), out.back(), tol)) out.pop_back();
    g = out;
  };
  clean(a);
  clean(b);
  if (a.size() < 3 || b.size() < 3 || signed_area(a) <= 0 || signed_area(b) <= 0)
    throw Error(Err::InvalidInput, "cut does not split the polygon into two pieces");
  return {a, b};
}

bool polygons_congruent(const Polygon& a, const Polygon& b, const Tol& tol) {
  Polygon pa = remove_collinear(a, tol);
  Polygon pb = remove_collinear(b, tol);
  if (signed_area(pa) < 0) std::reverse(pa.begin(), pa.end());
  if (signed_area(pb) < 0) std::reverse(pb.begin(), pb.end());
  if (pa.size() != pb.size() || pa.size() < 3) return false;
  size_t n = pa.size();
  for (int refl = 0; refl < 2; ++refl) {
    Polygon cand = pb;
    if (refl) {
      std::reverse(cand.begin(), cand.end());
      for (auto& p : cand) p.y = -p.y;  // mirror, restoring CCW
    }
    for (size_t s = 0; s < n; ++s) {
      Segment2 e1{pa[0], pa[1]};
      Segment2 e2{cand[s % n], cand[(s + 1) % n]};
      if (std::abs(e1.length() - e2.length()) > tol.at(e1.length())) continue;
      Isometry2 g;
      try {
        g = isometry_from_segment_pair(e1, e2, false, tol);
      } catch (const Error&) {
        continue;
      }
      bool ok = true;
      for (size_t i = 0; i < n && ok; ++i)
        ok = near(g(pa[i]), cand[(s + i) % n], tol);
      if (ok) return true;
    }
  }
  return false;
}

}  // namespace refold
