#include "refold/geom.hpp"

#include <algorithm>

namespace refold {

const char* err_name(Err e) {
  switch (e) {
    case Err::InvalidInput: return "InvalidInput";
    case Err::NonSimple: return "NonSimple";
    case Err::CutDisconnects: return "CutDisconnects";
    case Err::GlueLengthMismatch: return "GlueLengthMismatch";
    case Err::GlueTargetNotFree: return "GlueTargetNotFree";
    case Err::OverlapViolation: return "OverlapViolation";
    case Err::NoReflection: return "NoReflection";
    case Err::ProjectionOutside: return "ProjectionOutside";
    case Err::PreconditionViolated: return "PreconditionViolated";
    case Err::NotConvex: return "NotConvex";
    case Err::AreaMismatch: return "AreaMismatch";
    case Err::NotALeaf: return "NotALeaf";
    case Err::NoSupportingSurface: return "NoSupportingSurface";
    case Err::WouldSelfIntersect: return "WouldSelfIntersect";
    case Err::SizeMismatch: return "SizeMismatch";
    case Err::GluingInconsistent: return "GluingInconsistent";
    case Err::ConnectivityLost: return "ConnectivityLost";
  }
  return "Unknown";
}

Vec2 normalized(const Vec2& v) {
  double n = norm(v);
  if (n < 1e-300) throw Error(Err::InvalidInput, "cannot normalize zero vector");
  return v / n;
}

Orientation orientation(const Point2& a, const Point2& b, const Point2& c,
                        const Tol& tol) {
  double area2 = cross(b - a, c - a);
  double scale = std::max({dist(a, b), dist(b, c), dist(a, c)});
  double band = tol.at(scale) * std::max(1.0, scale);
  if (area2 > band) return Orientation::Left;
  if (area2 < -band) return Orientation::Right;
  return Orientation::Collinear;
}

Point2 project(const Point2& p, const Line2& line) {
  double t = dot(p - line.anchor, line.direction);
  return line.anchor + line.direction * t;
}

double line_param(const Point2& p, const Line2& line) {
  return dot(p - line.anchor, line.direction);
}

Point2 line_intersection(const Line2& l1, const Line2& l2, const Tol& tol) {
  double denom = cross(l1.direction, l2.direction);
  if (std::abs(denom) <= tol.at(1.0))
    throw Error(Err::InvalidInput, "lines are parallel");
  double t = cross(l2.anchor - l1.anchor, l2.direction) / denom;
  return l1.anchor + l1.direction * t;
}

bool point_on_segment(const Point2& p, const Segment2& s, const Tol& tol) {
  double len = s.length();
  if (len <= tol.at(1.0)) return near(p, s.a, tol);
  Vec2 d = (s.b - s.a) / len;
  double t = dot(p - s.a, d);
  double off = std::abs(cross(p - s.a, d));
  double band = tol.at(std::max({len, norm(p - s.a), 1.0}));
  return off <= band && t >= -band && t <= len + band;
}

bool segments_intersect(const Segment2& s, const Segment2& t, const Tol& tol) {
  auto o1 = orientation(s.a, s.b, t.a, tol);
  auto o2 = orientation(s.a, s.b, t.b, tol);
  auto o3 = orientation(t.a, t.b, s.a, tol);
  auto o4 = orientation(t.a, t.b, s.b, tol);
  if (o1 != o2 && o3 != o4 && o1 != Orientation::Collinear &&
      o2 != Orientation::Collinear && o3 != Orientation::Collinear &&
      o4 != Orientation::Collinear)
    return true;
  if (o1 == Orientation::Collinear && point_on_segment(t.a, s, tol)) return true;
  if (o2 == Orientation::Collinear && point_on_segment(t.b, s, tol)) return true;
  if (o3 == Orientation::Collinear && point_on_segment(s.a, t, tol)) return true;
  if (o4 == Orientation::Collinear && point_on_segment(s.b, t, tol)) return true;
  return false;
}

bool segments_cross(const Segment2& s, const Segment2& t, const Tol& tol) {
  if (!segments_intersect(s, t, tol)) return false;
  // Touching only at shared endpoints does not count.
  auto endpoint_touch = [&](const Point2& p) {
    return near(p, s.a, tol) || near(p, s.b, tol);
  };
  auto o1 = orientation(s.a, s.b, t.a, tol);
  auto o2 = orientation(s.a, s.b, t.b, tol);
  if (o1 == Orientation::Collinear && o2 == Orientation::Collinear) {
    // Collinear: crossing iff the overlap is longer than a point.
    Vec2 d = s.b - s.a;
    double len = norm(d);
    d = d / len;
    double ta = dot(t.a - s.a, d), tb = dot(t.b - s.a, d);
    double lo = std::max(0.0, std::min(ta, tb));
    double hi = std::min(len, std::max(ta, tb));
    return hi - lo > tol.at(len);
  }
  if (o1 == Orientation::Collinear && !endpoint_touch(t.a) &&
      point_on_segment(t.a, s, tol))
    return true;
  if (o2 == Orientation::Collinear && !endpoint_touch(t.b) &&
      point_on_segment(t.b, s, tol))
    return true;
  auto o3 = orientation(t.a, t.b, s.a, tol);
  auto o4 = orientation(t.a, t.b, s.b, tol);
  if (o3 == Orientation::Collinear && !endpoint_touch(s.a)) return point_on_segment(s.a, t, tol);
  if (o4 == Orientation::Collinear && !endpoint_touch(s.b)) return point_on_segment(s.b, t, tol);
  if (o1 != o2 && o3 != o4) {
    // Strict crossing unless it happens at a shared endpoint.
    if (endpoint_touch(t.a) || endpoint_touch(t.b)) return false;
    return true;
  }
  return false;
}

Isometry2 Isometry2::translation(const Vec2& t) {
  Isometry2 g;
  g.tx = t.x;
  g.ty = t.y;
  return g;
}

Isometry2 Isometry2::rotation180(const Point2& c) {
  Isometry2 g;
  g.m00 = -1;
  g.m11 = -1;
  g.tx = 2 * c.x;
  g.ty = 2 * c.y;
  return g;
}

Isometry2 Isometry2::rotation(const Point2& c, double cos_a, double sin_a) {
  Isometry2 g;
  g.m00 = cos_a;
  g.m01 = -sin_a;
  g.m10 = sin_a;
  g.m11 = cos_a;
  g.tx = c.x - (g.m00 * c.x + g.m01 * c.y);
  g.ty = c.y - (g.m10 * c.x + g.m11 * c.y);
  return g;
}

Isometry2 Isometry2::reflection(const Line2& axis) {
  double dx = axis.direction.x, dy = axis.direction.y;
  Isometry2 g;
  g.m00 = dx * dx - dy * dy;
  g.m01 = 2 * dx * dy;
  g.m10 = 2 * dx * dy;
  g.m11 = dy * dy - dx * dx;
  g.improper = true;
  Point2 a = axis.anchor;
  g.tx = a.x - (g.m00 * a.x + g.m01 * a.y);
  g.ty = a.y - (g.m10 * a.x + g.m11 * a.y);
  return g;
}

Isometry2 Isometry2::compose(const Isometry2& inner) const {
  Isometry2 g;
  g.m00 = m00 * inner.m00 + m01 * inner.m10;
  g.m01 = m00 * inner.m01 + m01 * inner.m11;
  g.m10 = m10 * inner.m00 + m11 * inner.m10;
  g.m11 = m10 * inner.m01 + m11 * inner.m11;
  Point2 t = (*this)({inner.tx, inner.ty});
  g.tx = t.x;
  g.ty = t.y;
  g.improper = improper != inner.improper;
  return g;
}

Isometry2 Isometry2::inverse() const {
  // Orthogonal matrix: inverse of the linear part is its transpose.
  Isometry2 g;
  g.m00 = m00;
  g.m01 = m10;
  g.m10 = m01;
  g.m11 = m11;
  g.improper = improper;
  g.tx = -(g.m00 * tx + g.m01 * ty);
  g.ty = -(g.m10 * tx + g.m11 * ty);
  return g;
}

bool Isometry2::is_identity(const Tol& tol) const {
  double e = tol.at(1.0, std::max(std::abs(tx), std::abs(ty)));
  return std::abs(m00 - 1) <= e && std::abs(m01) <= e && std::abs(m10) <= e &&
         std::abs(m11 - 1) <= e && std::abs(tx) <= e && std::abs(ty) <= e;
}

bool Isometry2::valid(const Tol& tol) const {
  double e = tol.at(1.0);
  double r0 = m00 * m00 + m01 * m01;
  double r1 = m10 * m10 + m11 * m11;
  double d = m00 * m10 + m01 * m11;
  if (std::abs(r0 - 1) > 8 * e || std::abs(r1 - 1) > 8 * e || std::abs(d) > 8 * e)
    return false;
  double dt = det();
  return improper ? std::abs(dt + 1) <= 8 * e : std::abs(dt - 1) <= 8 * e;
}

bool isometries_equal(const Isometry2& a, const Isometry2& b, const Tol& tol) {
  double e = tol.at(1.0, std::max({std::abs(a.tx), std::abs(a.ty), std::abs(b.tx),
                                   std::abs(b.ty)}));
  return std::abs(a.m00 - b.m00) <= e && std::abs(a.m01 - b.m01) <= e &&
         std::abs(a.m10 - b.m10) <= e && std::abs(a.m11 - b.m11) <= e &&
         std::abs(a.tx - b.tx) <= e && std::abs(a.ty - b.ty) <= e &&
         a.improper == b.improper;
}

Isometry2 isometry_from_segment_pair(const Segment2& s1, const Segment2& s2,
                                     bool improper, const Tol& tol) {
  double l1 = s1.length(), l2 = s2.length();
  if (std::abs(l1 - l2) > tol.at(l1, l2))
    throw Error(Err::GlueLengthMismatch,
                "segment lengths differ: " + std::to_string(l1) + " vs " +
                    std::to_string(l2));
  Vec2 d1 = s1.dir(), d2 = s2.dir();
  double c = dot(d1, d2);
  double s = cross(d1, d2);
  Isometry2 g;
  if (!improper) {
    g.m00 = c;
    g.m01 = -s;
    g.m10 = s;
    g.m11 = c;
  } else {
    // Rotation taking d1 to d2, composed with the reflection fixing d1.
    double rx = d1.x * d1.x - d1.y * d1.y;
    double ry = 2 * d1.x * d1.y;
    g.m00 = c * rx - (-s) * (-ry);
    // Spell it out: L = R(d1->d2) * Ref(d1).
    double R00 = c, R01 = -s, R10 = s, R11 = c;
    double F00 = rx, F01 = ry, F10 = ry, F11 = -rx;
    g.m00 = R00 * F00 + R01 * F10;
    g.m01 = R00 * F01 + R01 * F11;
    g.m10 = R10 * F00 + R11 * F10;
    g.m11 = R10 * F01 + R11 * F11;
    g.improper = true;
  }
  Point2 image = {g.m00 * s1.a.x + g.m01 * s1.a.y, g.m10 * s1.a.x + g.m11 * s1.a.y};
  g.tx = s2.a.x - image.x;
  g.ty = s2.a.y - image.y;
  return g;
}

Line2 reflection_axis(const Isometry2& r, const Tol& tol) {
  if (!r.improper) throw Error(Err::NoReflection, "isometry is orientation preserving");
  // Fixed direction: eigenvector of the linear part for eigenvalue +1.
  // For a reflection matrix [[a,b],[b,-a]] the axis direction is (b, 1-a)
  // or (1+a, b), whichever is numerically stable.
  double a = r.m00, b = r.m01;
  Vec2 dir = (std::abs(1 - a) > std::abs(1 + a)) ? Vec2{b, 1 - a} : Vec2{1 + a, b};
  if (norm(dir) <= tol.at(1.0)) throw Error(Err::NoReflection, "degenerate axis");
  dir = normalized(dir);
  // A point on the axis: midpoint of p and r(p) lies on the axis for any p,
  // provided r is a pure reflection (not a glide). Use the origin and check.
  Point2 p{0, 0};
  Point2 mid = midpoint(p, r(p));
  Point2 mid2 = midpoint(Point2{1, 0}, r(Point2{1, 0}));
  Line2 axis(mid, dir);
  // Guard against glide reflections: mid2 must lie on the axis.
  Point2 proj2 = project(mid2, axis);
  if (dist(proj2, mid2) > 1e-6)
    throw Error(Err::NoReflection, "isometry is a glide reflection");
  return axis;
}

}  // namespace refold
