#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace refold {

// ---------------------------------------------------------------------------
// Errors

enum class Err {
  InvalidInput,
  NonSimple,
  CutDisconnects,
  GlueLengthMismatch,
  GlueTargetNotFree,
  OverlapViolation,
  NoReflection,
  ProjectionOutside,
  PreconditionViolated,
  NotConvex,
  AreaMismatch,
  NotALeaf,
  NoSupportingSurface,
  WouldSelfIntersect,
  SizeMismatch,
  GluingInconsistent,
  ConnectivityLost,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Err code;
  Error(Err c, const std::string& msg)
      : std::runtime_error(std::string(err_name(c)) + ": " + msg), code(c) {}
};

// Tolerance model: a relative epsilon scaled by the local magnitude of the
// quantities involved, with an absolute floor of eps itself.
struct Tol {
  double eps = 1e-9;
  double at(double scale) const { return eps * std::max(1.0, std::abs(scale)); }
  double at(double a, double b) const {
    return eps * std::max({1.0, std::abs(a), std::abs(b)});
  }
};

// ---------------------------------------------------------------------------
// Points and vectors

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2() = default;
  Point2(double px, double py) : x(px), y(py) {}

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  Point2 operator/(double s) const { return {x / s, y / s}; }
  Point2 operator-() const { return {-x, -y}; }
};

using Vec2 = Point2;
using Polyline2 = std::vector<Point2>;

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double dist(const Point2& a, const Point2& b) { return norm(a - b); }
inline Point2 midpoint(const Point2& a, const Point2& b) {
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }  // rotate +90 degrees

inline bool near(const Point2& a, const Point2& b, const Tol& tol = {}) {
  return dist(a, b) <= tol.at(norm(a), norm(b));
}

Vec2 normalized(const Vec2& v);  // throws InvalidInput on near-zero vectors

// ---------------------------------------------------------------------------
// Segments and lines

struct Segment2 {
  Point2 a, b;
  Segment2() = default;
  Segment2(Point2 pa, Point2 pb) : a(pa), b(pb) {}
  double length() const { return dist(a, b); }
  Vec2 dir() const { return normalized(b - a); }
  Point2 at(double t) const { return a + (b - a) * t; }  // t in [0,1]
};

struct Line2 {
  Point2 anchor;
  Vec2 direction;  // unit
  Line2() : direction{1, 0} {}
  Line2(Point2 p, Vec2 d) : anchor(p), direction(normalized(d)) {}
  static Line2 through(const Point2& p, const Point2& q) { return Line2(p, q - p); }
};

enum class Orientation { Left, Right, Collinear };

// Sign of the signed area of triangle (a,b,c), with a tolerance band.
Orientation orientation(const Point2& a, const Point2& b, const Point2& c,
                        const Tol& tol = {});

Point2 project(const Point2& p, const Line2& line);

// Parameter of the projection of p along the line (signed distance from anchor).
double line_param(const Point2& p, const Line2& line);

// Intersection of two (infinite) lines; throws InvalidInput when parallel
// within tolerance.
Point2 line_intersection(const Line2& l1, const Line2& l2, const Tol& tol = {});

// Proper segment intersection test (shared endpoints count as touching).
// Returns true if the closed segments share at least one point.
bool segments_intersect(const Segment2& s, const Segment2& t, const Tol& tol = {});

// True if the open interiors of the segments cross or overlap.
bool segments_cross(const Segment2& s, const Segment2& t, const Tol& tol = {});

bool point_on_segment(const Point2& p, const Segment2& s, const Tol& tol = {});

// ---------------------------------------------------------------------------
// Rigid motions of the plane (possibly orientation reversing)

struct Isometry2 {
  // Row-major 2x2 orthogonal matrix plus translation.
  double m00 = 1, m01 = 0, m10 = 0, m11 = 1;
  double tx = 0, ty = 0;
  bool improper = false;  // det == -1

  Point2 operator()(const Point2& p) const {
    return {m00 * p.x + m01 * p.y + tx, m10 * p.x + m11 * p.y + ty};
  }
  Vec2 linear(const Vec2& v) const {
    return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y};
  }
  std::vector<Point2> operator()(const std::vector<Point2>& pts) const {
    std::vector<Point2> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back((*this)(p));
    return out;
  }

  static Isometry2 identity() { return {}; }
  static Isometry2 translation(const Vec2& t);
  static Isometry2 rotation180(const Point2& center);
  static Isometry2 rotation(const Point2& center, double cos_a, double sin_a);
  static Isometry2 reflection(const Line2& axis);

  Isometry2 compose(const Isometry2& inner) const;  // this ∘ inner
  Isometry2 inverse() const;
  double det() const { return m00 * m11 - m01 * m10; }
  bool is_identity(const Tol& tol = {}) const;
  // Matrix orthogonality and flag/determinant consistency.
  bool valid(const Tol& tol = {}) const;
};

bool isometries_equal(const Isometry2& a, const Isometry2& b, const Tol& tol = {});

// The unique isometry of the requested orientation mapping s1.a -> s2.a and
// s1.b -> s2.b. Throws GlueLengthMismatch if |s1| != |s2| within tolerance.
Isometry2 isometry_from_segment_pair(const Segment2& s1, const Segment2& s2,
                                     bool improper, const Tol& tol = {});

// Axis of a reflection (line of fixed points). Throws if r is proper.
Line2 reflection_axis(const Isometry2& r, const Tol& tol = {});

}  // namespace refold
