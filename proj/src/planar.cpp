#include "refold/planar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace refold {

namespace {

double scale_of(const Polygon& poly) {
  double s = 1.0;
  for (const auto& p : poly) s = std::max({s, std::abs(p.x), std::abs(p.y)});
  return s;
}

Point2 placed_arc_point(const Manifold& m, const std::map<int, Isometry2>& place,
                        const ArcRef& arc, double s) {
  return place.at(arc.face)(arc_point(m, arc, s));
}

// A boundary arc (or glued arc) lying along a reference segment, with the
// positions of its two ends in the segment's arc-length parameter.
struct ArcOnSegment {
  ArcRef arc;
  double s_at_t0 = 0, s_at_t1 = 0;
  bool parity = false;  // improper placement
};

bool arc_on_segment(const Manifold& m, const std::map<int, Isometry2>& place,
                    const ArcRef& arc, const Segment2& S, ArcOnSegment& out,
                    const Tol& tol) {
  double L = S.length();
  Vec2 d = (S.b - S.a) / L;
  Point2 p0 = placed_arc_point(m, place, arc, 0.0);
  Point2 p1 = placed_arc_point(m, place, arc, arc.length());
  double band = tol.at(L) * 256;
  if (std::abs(cross(p0 - S.a, d)) > band) return false;
  if (std::abs(cross(p1 - S.a, d)) > band) return false;
  double s0 = dot(p0 - S.a, d);
  double s1 = dot(p1 - S.a, d);
  if (std::max(s0, s1) < -band || std::min(s0, s1) > L + band) return false;
  out.arc = arc;
  out.s_at_t0 = s0;
  out.s_at_t1 = s1;
  out.parity = place.at(arc.face).improper;
  return true;
}

// Cut specs severing all glued coverage along segment S (perimeter folds or
// interior seams alike). Only the portion inside S is severed.
std::vector<CutGluingSpec> gluing_cuts_on_segment(const Manifold& m,
                                                  const std::map<int, Isometry2>& place,
                                                  const Segment2& S, const Tol& tol) {
  double L = S.length();
  std::vector<CutGluingSpec> out;
  for (const auto& g : m.gluing) {
    ArcOnSegment a_on, b_on;
    bool a_ok = arc_on_segment(m, place, g.a, S, a_on, tol);
    bool b_ok = arc_on_segment(m, place, g.b, S, b_on, tol);
    bool tiny = g.a.length() <= tol.at(L) * 2048;
    if (!a_ok && tiny && b_ok) {
      // Degenerate pair: judge by the side that sits on the cut.
      out.push_back({{g.b.face, g.b.edge, g.b.t0, g.b.t1}});
      continue;
    }
    if (!a_ok) continue;
    if (!b_ok && !tiny) continue;
    double lo_s = std::min(a_on.s_at_t0, a_on.s_at_t1);
    double hi_s = std::max(a_on.s_at_t0, a_on.s_at_t1);
    double clamped_lo = std::max(lo_s, 0.0);
    double clamped_hi = std::min(hi_s, L);
    if (clamped_hi - clamped_lo <= tol.at(L) * 8) {
      // Degenerate pairs sitting on the cut still have to go; they would
      // otherwise tether the two sides together.
      if (hi_s - lo_s <= tol.at(L) * 2048 && lo_s >= -tol.at(L) * 2048 &&
          hi_s <= L + tol.at(L) * 2048)
        out.push_back({{g.a.face, g.a.edge, g.a.t0, g.a.t1}});
      continue;
    }
    // Swallow sliver leftovers: severing all but a vanishing fraction of a
    // pair leaves a degenerate gluing behind.
    if (clamped_lo - lo_s <= tol.at(L) * 1024) clamped_lo = lo_s;
    if (hi_s - clamped_hi <= tol.at(L) * 1024) clamped_hi = hi_s;
    double span = a_on.s_at_t1 - a_on.s_at_t0;
    auto t_of_s = [&](double s) {
      double u = (s - a_on.s_at_t0) / span;  // 0 at t0, 1 at t1
      return g.a.t0 + u * g.a.length();
    };
    double ta = t_of_s(clamped_lo), tb = t_of_s(clamped_hi);
    if (ta > tb) std::swap(ta, tb);
    out.push_back({{g.a.face, g.a.edge, ta, tb}});
  }
  std::sort(out.begin(), out.end(), [](const CutGluingSpec& x, const CutGluingSpec& y) {
    if (x.span.face != y.span.face) return x.span.face < y.span.face;
    if (x.span.edge != y.span.edge) return x.span.edge < y.span.edge;
    return x.span.t0 < y.span.t0;
  });
  std::vector<CutGluingSpec> merged;
  for (const auto& c : out) {
    if (!merged.empty()) {
      CutGluingSpec& p = merged.back();
      if (p.span.face == c.span.face && p.span.edge == c.span.edge &&
          c.span.t0 <= p.span.t1 + tol.at(p.span.t1)) {
        p.span.t1 = std::max(p.span.t1, c.span.t1);
        continue;
      }
    }
    merged.push_back(c);
  }
  return merged;
}

// Free (unglued) boundary intervals of the manifold lying along segment S.
std::vector<ArcOnSegment> free_arcs_on_segment(const Manifold& m,
                                               const std::map<int, Isometry2>& place,
                                               const Segment2& S, const Tol& tol) {
  std::vector<ArcOnSegment> out;
  for (const auto& f : m.faces) {
    size_t n = f.polygon.size();
    for (size_t e = 0; e < n; ++e) {
      double len = edge_length(f.polygon, e);
      std::vector<std::pair<double, double>> covered;
      for (const auto& g : m.gluing)
        for (const ArcRef* arc : {&g.a, &g.b})
          if (arc->face == f.id && arc->edge == static_cast<int>(e))
            covered.push_back({arc->t0, arc->t1});
      std::sort(covered.begin(), covered.end());
      double cur = 0.0;
      std::vector<std::pair<double, double>> free;
      for (auto& c : covered) {
        if (c.first - cur > tol.at(len) * 8) free.push_back({cur, c.first});
        cur = std::max(cur, c.second);
      }
      if (len - cur > tol.at(len) * 8) free.push_back({cur, len});
      for (auto& [u0, u1] : free) {
        ArcRef arc{f.id, static_cast<int>(e), u0, u1};
        ArcOnSegment on;
        if (!arc_on_segment(m, place, arc, S, on, tol)) continue;
        // Clip the free interval to the segment.
        double L = S.length();
        double lo = std::min(on.s_at_t0, on.s_at_t1);
        double hi = std::max(on.s_at_t0, on.s_at_t1);
        double clo = std::max(lo, 0.0), chi = std::min(hi, L);
        if (chi - clo <= tol.at(L) * 8) continue;
        double span = on.s_at_t1 - on.s_at_t0;
        auto t_of_s = [&](double s) {
          double w = (s - on.s_at_t0) / span;
          return arc.t0 + w * arc.length();
        };
        double ta = t_of_s(clo), tb = t_of_s(chi);
        double sa = clo, sb = chi;
        if (ta > tb) {
          std::swap(ta, tb);
          std::swap(sa, sb);
        }
        ArcOnSegment clipped;
        clipped.arc = ArcRef{arc.face, arc.edge, ta, tb};
        clipped.s_at_t0 = sa;
        clipped.s_at_t1 = sb;
        clipped.parity = on.parity;
        out.push_back(clipped);
      }
    }
  }
  return out;
}

// Pairs two families of free arcs sharing the s-parameterization of a
// reference segment: corresponding points have equal s. Emits one glue per
// piece of the common refinement of the two interval families.
std::vector<GlueSpec> pair_arc_families(const std::vector<ArcOnSegment>& fam1,
                                        const std::vector<ArcOnSegment>& fam2,
                                        double L, const Tol& tol) {
  std::vector<double> breaks{0.0, L};
  for (const auto* fam : {&fam1, &fam2})
    for (const auto& a : *fam) {
      breaks.push_back(std::clamp(std::min(a.s_at_t0, a.s_at_t1), 0.0, L));
      breaks.push_back(std::clamp(std::max(a.s_at_t0, a.s_at_t1), 0.0, L));
    }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [&](double a, double b) { return b - a <= tol.at(L) * 8; }),
               breaks.end());
  auto find_cover = [&](const std::vector<ArcOnSegment>& fam, double smid) {
    for (const auto& a : fam) {
      double lo = std::min(a.s_at_t0, a.s_at_t1), hi = std::max(a.s_at_t0, a.s_at_t1);
      if (smid >= lo - tol.at(L) * 8 && smid <= hi + tol.at(L) * 8) return &a;
    }
    return static_cast<const ArcOnSegment*>(nullptr);
  };
  std::vector<GlueSpec> out;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    double x = breaks[i], y = breaks[i + 1];
    // Pieces near the noise floor stay unglued: pairing them is a gamble.
    if (y - x <= tol.at(L) * 2048) continue;
    double mid = 0.5 * (x + y);
    const ArcOnSegment* c1 = find_cover(fam1, mid);
    const ArcOnSegment* c2 = find_cover(fam2, mid);
    if (!c1 && !c2) continue;
    if (!c1 || !c2)
      throw Error(Err::GluingInconsistent, "free boundary mismatch while regluing");
    auto sub_arc = [&](const ArcOnSegment& a) {
      double span = a.s_at_t1 - a.s_at_t0;
      auto t_of_s = [&](double s) {
        double u = (s - a.s_at_t0) / span;
        return a.arc.t0 + u * a.arc.length();
      };
      double ta = t_of_s(x), tb = t_of_s(y);
      bool fwd = ta < tb;
      if (!fwd) std::swap(ta, tb);
      return std::make_pair(ArcRef{a.arc.face, a.arc.edge, ta, tb}, fwd);
    };
    auto [arc1, fwd1] = sub_arc(*c1);
    auto [arc2, fwd2] = sub_arc(*c2);
    GlueSpec gs;
    gs.a = arc1;
    gs.b = arc2;
    gs.reversed = fwd1 != fwd2;
    out.push_back(gs);
  }
  return out;
}

// Intervals of a segment lying strictly inside a placed polygon, as parameter
// pairs in [0,1] along the segment.
std::vector<std::pair<double, double>> inside_runs(const Polygon& placed_poly,
                                                   const Segment2& seg, const Tol& tol) {
  std::vector<double> params{0.0, 1.0};
  size_t n = placed_poly.size();
  Vec2 d = seg.b - seg.a;
  for (size_t e = 0; e < n; ++e) {
    Point2 p = placed_poly[e], q = placed_poly[(e + 1) % n];
    double denom = cross(d, q - p);
    if (std::abs(denom) < 1e-300) continue;
    double t = cross(p - seg.a, q - p) / denom;
    double u = cross(p - seg.a, d) / denom;
    double band = tol.at(norm(d)) * 8;
    if (t > band && t < 1 - band && u > -band && u < 1 + band) params.push_back(t);
  }
  std::sort(params.begin(), params.end());
  std::vector<std::pair<double, double>> runs;
  for (size_t i = 0; i + 1 < params.size(); ++i) {
    double x = params[i], y = params[i + 1];
    if (y - x <= tol.at(1.0) * 16) continue;
    Point2 mid = seg.a + d * (0.5 * (x + y));
    if (point_in_polygon(mid, placed_poly, tol) == PointSide::Inside)
      runs.push_back({x, y});
  }
  std::vector<std::pair<double, double>> merged;
  for (auto& r : runs) {
    if (!merged.empty() && r.first <= merged.back().second + tol.at(1.0) * 16)
      merged.back().second = r.second;
    else
      merged.push_back(r);
  }
  return merged;
}

// Directed segment soup utilities for footprint reassembly.
struct DirSeg {
  Point2 a, b;
};

void cancel_opposite(std::vector<DirSeg>& segs, const Tol& tol, double scale) {
  bool again = true;
  while (again) {
    again = false;
    for (size_t i = 0; i < segs.size() && !again; ++i) {
      for (size_t j = 0; j < segs.size() && !again; ++j) {
        if (i == j) continue;
        const DirSeg u = segs[i];
        const DirSeg v = segs[j];
        double lu = dist(u.a, u.b);
        if (lu <= tol.at(scale) * 8) continue;
        Vec2 d = (u.b - u.a) / lu;
        if (std::abs(cross(v.a - u.a, d)) > tol.at(scale) * 64) continue;
        if (std::abs(cross(v.b - u.a, d)) > tol.at(scale) * 64) continue;
        double r = dot(v.a - u.a, d);
        double s = dot(v.b - u.a, d);
        if (r <= s) continue;  // parallel, not opposite
        double lo = std::max(0.0, s), hi = std::min(lu, r);
        if (hi - lo <= tol.at(scale) * 64) continue;
        std::vector<DirSeg> repl;
        if (lo > tol.at(scale) * 8) repl.push_back({u.a, u.a + d * lo});
        if (lu - hi > tol.at(scale) * 8) repl.push_back({u.a + d * hi, u.b});
        if (s < lo - tol.at(scale) * 8) repl.push_back({u.a + d * lo, v.b});
        if (r > hi + tol.at(scale) * 8) repl.push_back({v.a, u.a + d * hi});
        size_t hi_idx = std::max(i, j), lo_idx = std::min(i, j);
        segs.erase(segs.begin() + static_cast<long>(hi_idx));
        segs.erase(segs.begin() + static_cast<long>(lo_idx));
        segs.insert(segs.end(), repl.begin(), repl.end());
        again = true;
      }
    }
  }
}

Polygon stitch_cycle(std::vector<DirSeg> segs, const Tol& tol, double scale) {
  if (segs.empty()) throw Error(Err::OverlapViolation, "empty footprint boundary");
  Polygon pts;
  DirSeg cur = segs.back();
  segs.pop_back();
  Point2 start = cur.a;
  pts.push_back(cur.a);
  size_t total = segs.size() + 1;
  for (size_t guard = 0; guard <= 4 * total; ++guard) {
    pts.push_back(cur.b);
    if (dist(cur.b, start) <= tol.at(scale) * 128 && pts.size() > 2) break;
    double best = 1e300;
    size_t bi = segs.size();
    for (size_t i = 0; i < segs.size(); ++i) {
      double d = dist(segs[i].a, cur.b);
      if (d < best) {
        best = d;
        bi = i;
      }
    }
    if (bi == segs.size() || best > tol.at(scale) * 128)
      throw Error(Err::OverlapViolation, "footprint boundary does not close");
    cur = segs[bi];
    segs.erase(segs.begin() + static_cast<long>(bi));
  }
  if (!segs.empty())
    throw Error(Err::OverlapViolation, "footprint boundary has leftover pieces");
  if (!pts.empty() && dist(pts.front(), pts.back()) <= tol.at(scale) * 128)
    pts.pop_back();
  Polygon clean = remove_collinear(pts, Tol{tol.eps * 16});
  if (clean.size() < 3 || signed_area(clean) <= 0 || !is_simple(clean, tol))
    throw Error(Err::OverlapViolation, "footprint is not a simple positive polygon");
  return clean;
}

Polygon splice_union(const Polygon& stay, const Polygon& moved, const Tol& tol) {
  double scale = std::max(scale_of(stay), scale_of(moved));
  std::vector<DirSeg> segs;
  for (size_t i = 0; i < stay.size(); ++i)
    segs.push_back({stay[i], stay[(i + 1) % stay.size()]});
  for (size_t i = 0; i < moved.size(); ++i)
    segs.push_back({moved[i], moved[(i + 1) % moved.size()]});
  cancel_opposite(segs, tol, scale);
  return stitch_cycle(std::move(segs), tol, scale);
}

}  // namespace

// ---------------------------------------------------------------------------

PlanarState make_double_cover_state(const Polygon& polygon, const Tol& tol) {
  PlanarState st;
  Polygon poly = remove_collinear(polygon, tol);
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  st.m = double_cover(poly, tol);
  st.footprint = poly;
  st.place[0] = Isometry2::identity();
  // The mirror face is placed by the reflection across the x-axis.
  st.place[1] = Isometry2::reflection(Line2({0, 0}, {1, 0}));
  verify_planar_state(st, tol);
  return st;
}

DoubleCover to_double_cover(const PlanarState& st) { return {st.footprint, st.m}; }

void reposition(PlanarState& st, const Isometry2& iso) {
  for (auto& [id, p] : st.place) p = iso.compose(p);
  st.footprint = iso(st.footprint);
}

void verify_planar_state(const PlanarState& st, const Tol& tol) {
  double scale = scale_of(st.footprint);
  for (const auto& g : st.m.gluing) {
    double len = g.a.length();
    for (double s : {0.0, 0.5 * len, len}) {
      Point2 pa = placed_arc_point(st.m, st.place, g.a, s);
      double sb = g.reversed ? g.b.length() - s : s;
      Point2 pb = placed_arc_point(st.m, st.place, g.b, sb);
      if (dist(pa, pb) > tol.at(scale) * 256)
        throw Error(Err::GluingInconsistent,
                    "gluing not realized by placements (off by " +
                        std::to_string(dist(pa, pb)) + ")");
    }
  }
  double area = st.m.total_area();
  double foot = polygon_area(st.footprint);
  if (std::abs(area - 2 * foot) > tol.at(area) * 64)
    throw Error(Err::AreaMismatch, "state does not cover the footprint twice");
  for (const auto& f : st.m.faces)
    for (const auto& p : f.polygon)
      if (point_in_polygon(st.place.at(f.id)(p), st.footprint, Tol{tol.eps * 256}) ==
          PointSide::Outside)
        throw Error(Err::OverlapViolation, "face placed outside the footprint");
}

bool witness_holds(const Manifold& m, const Witness& w, const Tol& tol) {
  double scale = 1.0;
  for (const auto& [id, iso] : w.placements)
    scale = std::max({scale, std::abs(iso.tx), std::abs(iso.ty)});
  std::optional<Isometry2> fold;
  if (w.fold_axis) {
    Segment2 ax = *w.fold_axis;
    fold = Isometry2::reflection(Line2::through(ax.a, ax.b));
  }
  for (const auto& g : m.gluing) {
    if (!w.placements.count(g.a.face) || !w.placements.count(g.b.face)) return false;
    double len = g.a.length();
    auto gap = [&](bool folded) {
      double worst = 0;
      for (double s : {0.0, len}) {
        Point2 pa = w.placements.at(g.a.face)(arc_point(m, g.a, s));
        double sb = g.reversed ? g.b.length() - s : s;
        Point2 pb = w.placements.at(g.b.face)(arc_point(m, g.b, sb));
        if (folded) pa = (*fold)(pa);
        worst = std::max(worst, dist(pa, pb));
      }
      return worst;
    };
    if (gap(false) <= tol.at(scale) * 256) continue;
    if (!fold) return false;
    if (gap(true) > tol.at(scale) * 256) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// The rearrange engine

std::vector<StepRecord> rearrange(PlanarState& st, const RearrangeSpec& spec,
                                  const std::string& provenance, const Tol& tol) {
  std::vector<StepRecord> out;
  double L1 = spec.a1b1.length();
  double L2 = spec.a2b2.length();
  double scale = scale_of(st.footprint);
  if (std::abs(L1 - L2) > tol.at(scale) * 16)
    throw Error(Err::NoReflection, "interchange segments have different lengths");
  bool identity_motion = spec.motion.is_identity(Tol{tol.eps * 16});
  // The reflection taking a1b1 to a2b2 must exist alongside the motion.
  Isometry2 refl = isometry_from_segment_pair(spec.a1b1, spec.a2b2, true, tol);
  if (!near(spec.motion(spec.a1b1.a), spec.a2b2.a, Tol{tol.eps * 64}) ||
      !near(spec.motion(spec.a1b1.b), spec.a2b2.b, Tol{tol.eps * 64}))
    throw Error(Err::PreconditionViolated, "motion does not map a1b1 to a2b2");
  if (spec.motion.improper)
    throw Error(Err::PreconditionViolated, "motion must preserve orientation");

  // Region split by the cut curve: region1 carries a1b1. Location checks run
  // at a forgiving tolerance; construction points can sit a few dozen ulps
  // off the assembled footprint.
  Tol loc{tol.eps * 256};
  auto [piece_a, piece_b] = split_polygon(st.footprint, spec.cut, loc);
  Point2 mid1 = midpoint(spec.a1b1.a, spec.a1b1.b);
  bool a_has = point_in_polygon(mid1, piece_a, loc) == PointSide::Boundary;
  bool b_has = point_in_polygon(mid1, piece_b, loc) == PointSide::Boundary;
  if (!a_has && !b_has)
    throw Error(Err::PreconditionViolated, "a1b1 is not on the footprint boundary");
  Polygon region1 = a_has ? piece_a : piece_b;
  Polygon region2 = a_has ? piece_b : piece_a;
  if (!identity_motion &&
      point_in_polygon(midpoint(spec.a2b2.a, spec.a2b2.b), region2, loc) !=
          PointSide::Boundary)
    throw Error(Err::PreconditionViolated, "a2b2 is not on the static region boundary");

  // ---- Step 1: open the folds along a1b1 and a2b2, interchange layers.
  RefoldStep step1;
  bool segments_coincide =
      (near(spec.a1b1.a, spec.a2b2.a, Tol{tol.eps * 64}) &&
       near(spec.a1b1.b, spec.a2b2.b, Tol{tol.eps * 64})) ||
      (near(spec.a1b1.a, spec.a2b2.b, Tol{tol.eps * 64}) &&
       near(spec.a1b1.b, spec.a2b2.a, Tol{tol.eps * 64}));
  step1.cut_gluings = gluing_cuts_on_segment(st.m, st.place, spec.a1b1, tol);
  if (!segments_coincide) {
    auto cuts2 = gluing_cuts_on_segment(st.m, st.place, spec.a2b2, tol);
    step1.cut_gluings.insert(step1.cut_gluings.end(), cuts2.begin(), cuts2.end());
  }
  {
    AppliedStep probe;
    Manifold mcut = apply_step(st.m, step1, &probe, tol);
    if (segments_coincide) {
      // Degenerate interchange: restore the folds.
      for (const auto& g : probe.severed) step1.glues.push_back({g.a, g.b, g.reversed});
    } else {
      auto fam1 = free_arcs_on_segment(mcut, st.place, spec.a1b1, tol);
      auto fam2 = free_arcs_on_segment(mcut, st.place, spec.a2b2, tol);
      for (bool parity : {false, true}) {
        std::vector<ArcOnSegment> f1, f2;
        for (const auto& a : fam1)
          if (a.parity == parity) f1.push_back(a);
        for (const auto& a : fam2)
          if (a.parity == parity) f2.push_back(a);
        auto glues = pair_arc_families(f1, f2, L1, tol);
        step1.glues.insert(step1.glues.end(), glues.begin(), glues.end());
      }
    }
  }
  StepRecord rec1;
  rec1.step = step1;
  st.m = apply_step(st.m, step1, &rec1.applied, tol);
  rec1.witness.placements = st.place;
  Line2 axis = reflection_axis(refl, tol);
  rec1.witness.fold_axis = Segment2{axis.anchor, axis.anchor + axis.direction};
  rec1.provenance = provenance + "/interchange";
  if (!witness_holds(st.m, rec1.witness, tol))
    throw Error(Err::GluingInconsistent, "interchange witness failed");
  out.push_back(rec1);

  // ---- Step 2: cut along the curve (and reattach contacts), move, refold.
  RefoldStep step2;
  for (size_t i = 0; i + 1 < spec.cut.size(); ++i) {
    Segment2 seg{spec.cut[i], spec.cut[i + 1]};
    auto cuts = gluing_cuts_on_segment(st.m, st.place, seg, tol);
    step2.cut_gluings.insert(step2.cut_gluings.end(), cuts.begin(), cuts.end());
  }
  // Interior portions of the cut, collected per face as placed polylines.
  // A face crossed several times gets several runs; since each split changes
  // the face structure, runs are resolved one at a time against a scratch
  // copy that replays the cuts as they are emitted.
  {
    struct Run {
      Polyline2 placed;
      bool parity;
    };
    std::vector<Run> runs;
    for (const auto& f : st.m.faces) {
      // The degenerate identity rearrange cuts only the upper layer: with no
      // interchange in place, cutting both layers would separate the surface.
      if (identity_motion && st.place.at(f.id).improper) continue;
      Polygon placed = st.place.at(f.id)(f.polygon);
      Polyline2 cur;
      auto flush = [&]() {
        if (cur.size() >= 2) runs.push_back({cur, st.place.at(f.id).improper});
        cur.clear();
      };
      for (size_t i = 0; i + 1 < spec.cut.size(); ++i) {
        Segment2 seg{spec.cut[i], spec.cut[i + 1]};
        auto rs = inside_runs(placed, seg, tol);
        for (auto& [x, y] : rs) {
          Point2 p = seg.at(x), q = seg.at(y);
          if (!cur.empty() && near(cur.back(), p, Tol{tol.eps * 128})) {
            cur.push_back(q);
          } else {
            flush();
            cur = {p, q};
          }
        }
      }
      flush();
    }
    Manifold scratch = st.m;
    {
      RefoldStep pre;
      pre.cut_gluings = step2.cut_gluings;
      scratch = apply_step(scratch, pre, nullptr, tol);
    }
    std::map<int, Isometry2> scratch_place = st.place;
    for (const auto& run : runs) {
      Point2 probe_pt = midpoint(run.placed[0], run.placed[1]);
      const Face* host = nullptr;
      for (const auto& f : scratch.faces) {
        if (scratch_place.at(f.id).improper != run.parity) continue;
        if (point_in_polygon(probe_pt, scratch_place.at(f.id)(f.polygon), tol) ==
            PointSide::Inside) {
          host = &f;
          break;
        }
      }
      if (!host)
        throw Error(Err::GluingInconsistent, "cut run lost its host face");
      Isometry2 inv = scratch_place.at(host->id).inverse();
      Polyline2 local;
      for (auto& p : run.placed) local.push_back(inv(p));
      // Snap the run ends onto the face boundary; clipping tolerances can
      // leave them a few ulps off.
      for (size_t w : {size_t{0}, local.size() - 1}) {
        auto pos = locate_on_boundary(host->polygon, local[w], Tol{tol.eps * 64});
        if (pos) local[w] = boundary_point(host->polygon, *pos);
      }
      CutInteriorSpec ci{host->id, local};
      step2.cut_interiors.push_back(ci);
      RefoldStep one;
      one.cut_interiors.push_back(ci);
      AppliedStep ap;
      scratch = apply_step(scratch, one, &ap, tol);
      for (const auto& rec : ap.splits)
        if (!scratch_place.count(rec.child_new))
          scratch_place[rec.child_new] = scratch_place.at(rec.parent);
    }
  }
  for (const auto& curve : spec.reattach) {
    Isometry2 pre = spec.motion.inverse();
    for (size_t i = 0; i + 1 < curve.size(); ++i) {
      Segment2 gamma{curve[i], curve[i + 1]};
      Segment2 gamma_piece{pre(gamma.a), pre(gamma.b)};
      auto cs = gluing_cuts_on_segment(st.m, st.place, gamma, tol);
      auto cp = gluing_cuts_on_segment(st.m, st.place, gamma_piece, tol);
      step2.cut_gluings.insert(step2.cut_gluings.end(), cs.begin(), cs.end());
      step2.cut_gluings.insert(step2.cut_gluings.end(), cp.begin(), cp.end());
    }
  }

  // Tentative application to discover the freed boundary.
  RefoldStep cuts_only = step2;
  AppliedStep probe;
  Manifold mcut = apply_step(st.m, cuts_only, &probe, tol);
  std::map<int, Isometry2> place2 = st.place;
  for (const auto& rec : probe.splits)
    if (!place2.count(rec.child_new)) place2[rec.child_new] = place2.at(rec.parent);

  // Which side of the cut region1 lies on, for classifying faces whose
  // representative point hugs the cut line.
  auto cut_side_sign = [&](const Point2& p) {
    double best_d = 1e300;
    double sign = 0;
    for (size_t i = 0; i + 1 < spec.cut.size(); ++i) {
      Segment2 seg{spec.cut[i], spec.cut[i + 1]};
      Vec2 d = seg.b - seg.a;
      double len = norm(d);
      if (len < 1e-300) continue;
      double t = std::clamp(dot(p - seg.a, d) / (len * len), 0.0, 1.0);
      Point2 foot = seg.a + d * t;
      double dd = dist(p, foot);
      if (dd < best_d) {
        best_d = dd;
        sign = cross(d, p - seg.a);
      }
    }
    return sign;
  };
  double region1_sign = cut_side_sign(interior_point(region1, tol));
  auto side_of = [&](const Face& f) {
    Point2 rep = place2.at(f.id)(interior_point(f.polygon, tol));
    if (point_in_polygon(rep, region1, tol) == PointSide::Inside) return 1;
    if (point_in_polygon(rep, region2, tol) == PointSide::Inside) return 2;
    Point2 c = place2.at(f.id)(polygon_centroid(f.polygon));
    double s = cut_side_sign(c);
    if (s * region1_sign > 0) return 1;
    if (s * region1_sign < 0) return 2;
    throw Error(Err::GluingInconsistent, "face not classifiable by region");
  };
  std::map<int, int> side;
  for (const auto& f : mcut.faces) side[f.id] = side_of(f);

  if (identity_motion) {
    for (const auto& g : probe.severed) step2.glues.push_back({g.a, g.b, g.reversed});
    for (const auto& rec : probe.splits)
      for (const auto& gs : rec.seam_glue) step2.glues.push_back(gs);
  } else {
    for (size_t i = 0; i + 1 < spec.cut.size(); ++i) {
      Segment2 seg{spec.cut[i], spec.cut[i + 1]};
      auto fam = free_arcs_on_segment(mcut, place2, seg, tol);
      for (int s : {1, 2}) {
        std::vector<ArcOnSegment> top, bot;
        for (const auto& a : fam) {
          if (side.at(a.arc.face) != s) continue;
          (a.parity ? bot : top).push_back(a);
        }
        if (top.empty() && bot.empty()) continue;
        auto glues = pair_arc_families(top, bot, seg.length(), tol);
        step2.glues.insert(step2.glues.end(), glues.begin(), glues.end());
      }
    }
    Isometry2 pre = spec.motion.inverse();
    for (const auto& curve : spec.reattach) {
      for (size_t i = 0; i + 1 < curve.size(); ++i) {
        Segment2 gamma{curve[i], curve[i + 1]};
        Segment2 gamma_piece{pre(gamma.a), pre(gamma.b)};
        auto fam_static = free_arcs_on_segment(mcut, place2, gamma, tol);
        auto fam_piece = free_arcs_on_segment(mcut, place2, gamma_piece, tol);
        for (bool parity : {false, true}) {
          std::vector<ArcOnSegment> fs, fp;
          for (const auto& a : fam_static)
            if (a.parity == parity && side.at(a.arc.face) == 2) fs.push_back(a);
          for (const auto& a : fam_piece)
            if (a.parity == parity && side.at(a.arc.face) == 1) fp.push_back(a);
          if (fs.empty() && fp.empty()) continue;
          auto glues = pair_arc_families(fs, fp, gamma.length(), tol);
          step2.glues.insert(step2.glues.end(), glues.begin(), glues.end());
        }
      }
    }
  }

  StepRecord rec2;
  rec2.step = step2;
  st.m = apply_step(st.m, step2, &rec2.applied, tol);
  for (const auto& rec : rec2.applied.splits)
    if (!st.place.count(rec.child_new)) st.place[rec.child_new] = st.place.at(rec.parent);
  if (!identity_motion) {
    for (const auto& f : st.m.faces)
      if (side.at(f.id) == 1) st.place[f.id] = spec.motion.compose(st.place.at(f.id));
    st.footprint = splice_union(region2, spec.motion(region1), tol);
  }
  rec2.witness.placements = st.place;
  rec2.provenance = provenance + "/refold";
  if (!witness_holds(st.m, rec2.witness, tol)) {
    std::string detail = "refold witness failed: cut=";
    for (const auto& p : spec.cut)
      detail += "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
    for (const auto& g : st.m.gluing) {
      double len = g.a.length();
      double worst = 0;
      for (double s : {0.0, len}) {
        Point2 pa = st.place.at(g.a.face)(arc_point(st.m, g.a, s));
        double sb = g.reversed ? g.b.length() - s : s;
        Point2 pb = st.place.at(g.b.face)(arc_point(st.m, g.b, sb));
        worst = std::max(worst, dist(pa, pb));
      }
      if (worst > tol.at(1.0) * 256) {
        Point2 a0 = place2.at(g.a.face)(arc_point(st.m, g.a, 0.0));
        Point2 a1 = place2.at(g.a.face)(arc_point(st.m, g.a, g.a.length()));
        detail += " [f" + std::to_string(g.a.face) + "e" + std::to_string(g.a.edge) +
                  "~f" + std::to_string(g.b.face) + "e" + std::to_string(g.b.edge) +
                  " gap " + std::to_string(worst) + " side(a)=" +
                  std::to_string(side.count(g.a.face) ? side.at(g.a.face) : -1) +
                  " side(b)=" +
                  std::to_string(side.count(g.b.face) ? side.at(g.b.face) : -1) +
                  " at (" + std::to_string(a0.x) + "," + std::to_string(a0.y) +
                  ")-(" + std::to_string(a1.x) + "," + std::to_string(a1.y) + ")";
        bool fresh = false;
        for (const auto& ng : rec2.applied.glued)
          if (ng.a.face == g.a.face && ng.b.face == g.b.face &&
              ng.a.edge == g.a.edge && ng.b.edge == g.b.edge)
            fresh = true;
        detail += fresh ? " FRESH" : " OLD";
        for (const auto& cg : step2.cut_gluings)
          if (cg.span.face == g.a.face || cg.span.face == g.b.face) {
            char b2[96];
            snprintf(b2, sizeof b2, " CUTSPAN(f%d e%d %.6e..%.6e)", cg.span.face,
                     cg.span.edge, cg.span.t0, cg.span.t1);
            detail += b2;
          }
        {
          char b3[64];
          snprintf(b3, sizeof b3, " ARC(f%d e%d %.6e..%.6e)", g.a.face, g.a.edge,
                   g.a.t0, g.a.t1);
          detail += b3;
        }
        // why did the cut scan skip this pair?
        for (size_t i = 0; i + 1 < spec.cut.size(); ++i) {
          Segment2 seg{spec.cut[i], spec.cut[i + 1]};
          double L = seg.length();
          Vec2 d = (seg.b - seg.a) / L;
          Point2 q0 = place2.at(g.a.face)(arc_point(st.m, g.a, 0.0));
          Point2 q1 = place2.at(g.a.face)(arc_point(st.m, g.a, g.a.length()));
          char buf[160];
          snprintf(buf, sizeof buf, " seg%zu(L=%.3e x0=%.3e x1=%.3e s0=%.3e s1=%.3e)",
                   i, L, cross(q0 - seg.a, d), cross(q1 - seg.a, d),
                   dot(q0 - seg.a, d), dot(q1 - seg.a, d));
          detail += buf;
        }
        detail += "]";
      }
    }
    throw Error(Err::GluingInconsistent, detail);
  }
  out.push_back(rec2);

#ifdef REFOLD_TRACE
  {
    double worst = 0;
    size_t nn = st.footprint.size();
    for (size_t i = 0; i < nn; ++i) {
      Point2 a = st.footprint[(i+nn-1)%nn], b = st.footprint[i], c = st.footprint[(i+1)%nn];
      double len = dist(a, c);
      if (len < 1e-12) continue;
      double off = std::abs(cross((c - a) / len, b - a));
      if (off < 1e-4) worst = std::max(worst, off);
    }
    fprintf(stderr, "[trace] %s bend=%.3e verts=%zu\n", rec2.provenance.c_str(), worst,
            st.footprint.size());
  }
#endif
  verify_planar_state(st, tol);
  return out;
}

// ---------------------------------------------------------------------------
// Triangle <-> rectangle conversions

namespace {

struct TriangleFrame {
  Point2 A, B, C;
  Vec2 dir;        // unit A->C
  Vec2 normal;     // unit, towards B
  double base;     // |AC|
  double height;   // of B over the line AC
  Point2 X, Y, O;  // midpoints of AB, BC; O = foot of B on the midline
};

TriangleFrame triangle_frame(Point2 A, Point2 B, Point2 C, const Tol& tol) {
  TriangleFrame f;
  f.A = A;
  f.B = B;
  f.C = C;
  f.base = dist(A, C);
  if (f.base <= tol.at(1.0)) throw Error(Err::PreconditionViolated, "degenerate base");
  f.dir = (C - A) / f.base;
  f.normal = perp(f.dir);
  if (dot(f.normal, B - A) < 0) f.normal = -f.normal;
  f.height = dot(B - A, f.normal);
  if (f.height <= tol.at(f.base) * 16)
    throw Error(Err::PreconditionViolated, "degenerate triangle");
  f.X = midpoint(A, B);
  f.Y = midpoint(B, C);
  Line2 midline(f.X, f.dir);
  f.O = project(B, midline);
  return f;
}

RectView rect_of(const TriangleFrame& f) {
  RectView r;
  r.corner = f.A;
  r.dir = f.dir;
  r.normal = f.normal;
  r.base = f.base;
  r.height = 0.5 * f.height;
  return r;
}

}  // namespace

RectView triangle_to_rectangle_acute(PlanarState& st, Point2 A, Point2 B, Point2 C,
                                     std::vector<StepRecord>& out, const Tol& tol) {
  TriangleFrame f = triangle_frame(A, B, C, tol);
  double scale = scale_of(st.footprint);
  double foot = dot(B - A, f.dir);
  if (foot < -tol.at(scale) * 64 || foot > f.base + tol.at(scale) * 64)
    throw Error(Err::ProjectionOutside, "apex foot lies outside the base");
  double eps = tol.at(scale) * 64;
  if (dist(f.O, f.X) > eps) {
    RearrangeSpec spec;
    spec.a1b1 = {f.X, f.B};
    spec.a2b2 = {f.X, f.A};
    spec.motion = Isometry2::rotation180(f.X);
    if (dist(f.O, f.Y) > eps)
      spec.cut = {f.B, f.O, f.X};
    else
      spec.cut = {f.O, f.X};  // the BO side already runs along the boundary
    auto recs = rearrange(st, spec, "acute/left-corner", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  if (dist(f.O, f.Y) > eps) {
    RearrangeSpec spec;
    spec.a1b1 = {f.Y, f.B};
    spec.a2b2 = {f.Y, f.C};
    spec.motion = Isometry2::rotation180(f.Y);
    spec.cut = {f.O, f.Y};
    auto recs = rearrange(st, spec, "acute/right-corner", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return rect_of(f);
}

void rect_to_triangle_acute(PlanarState& st, Point2 A, Point2 B, Point2 C,
                            std::vector<StepRecord>& out, const Tol& tol) {
  TriangleFrame f = triangle_frame(A, B, C, tol);
  double scale = scale_of(st.footprint);
  double foot = dot(B - A, f.dir);
  if (foot < -tol.at(scale) * 64 || foot > f.base + tol.at(scale) * 64)
    throw Error(Err::ProjectionOutside, "apex foot lies outside the base");
  double eps = tol.at(scale) * 64;
  Point2 O2 = f.X * 2.0 - f.O;  // top-left rectangle corner
  if (dist(f.O, f.Y) > eps) {
    RearrangeSpec spec;
    spec.a1b1 = {f.Y, f.Y * 2.0 - f.O};
    spec.a2b2 = {f.Y, f.O};
    spec.motion = Isometry2::rotation180(f.Y);
    spec.cut = {f.Y, f.C};
    auto recs = rearrange(st, spec, "rev-acute/right-corner", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  if (dist(f.O, f.X) > eps) {
    RearrangeSpec spec;
    spec.a1b1 = {f.X, O2};
    spec.a2b2 = {f.X, f.O};
    spec.motion = Isometry2::rotation180(f.X);
    spec.cut = {f.A, f.X};
    if (dist(f.O, f.Y) > eps) spec.reattach = {{f.B, f.O}};
    auto recs = rearrange(st, spec, "rev-acute/left-corner", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
}

RectView triangle_to_rectangle_scalene(PlanarState& st, Point2 A, Point2 B, Point2 C,
                                       std::vector<StepRecord>& out, const Tol& tol) {
  TriangleFrame f = triangle_frame(A, B, C, tol);
  double scale = scale_of(st.footprint);
  double foot = dot(B - A, f.dir);
  double overshoot = foot - f.base;  // distance from C to the apex foot
  if (overshoot <= tol.at(scale) * 16)
    throw Error(Err::PreconditionViolated, "apex foot is not beyond the far base end");
  if (overshoot > 4 * f.base + tol.at(scale) * 64)
    throw Error(Err::PreconditionViolated, "apex overshoot exceeds four base lengths");

  Point2 Yp = f.X * 2.0 - f.Y;
  {
    RearrangeSpec spec;
    spec.a1b1 = {f.X, f.B};
    spec.a2b2 = {f.X, f.A};
    spec.motion = Isometry2::rotation180(f.X);
    spec.cut = {f.Y, f.X};
    auto recs = rearrange(st, spec, "scalene/to-parallelogram", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  double h = 0.5 * f.height;
  Point2 V = midpoint(f.A, Yp);
  Point2 V1 = f.A + f.dir * dot(V - f.A, f.dir);
  {
    RearrangeSpec spec;
    spec.a1b1 = {V, f.A};
    spec.a2b2 = {V, Yp};
    spec.motion = Isometry2::rotation180(V);
    spec.cut = {V1, V};
    auto recs = rearrange(st, spec, "scalene/left-corner", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  Point2 W = midpoint(f.C, f.Y);
  Point2 W2 = f.A + f.dir * dot(W - f.A, f.dir) + f.normal * h;
  {
    RearrangeSpec spec;
    spec.a1b1 = {W, f.Y};
    spec.a2b2 = {W, f.C};
    spec.motion = Isometry2::rotation180(W);
    spec.cut = {W, W2};
    auto recs = rearrange(st, spec, "scalene/right-corner", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  Point2 C2 = f.C + f.normal * h;
  Point2 W1 = f.A + f.dir * dot(W - f.A, f.dir);
  Point2 V2 = V1 + f.normal * h;
  if (dist(V1, f.C) > tol.at(scale) * 64) {
    RearrangeSpec spec;
    spec.a1b1 = {W1, W2};
    spec.a2b2 = {V1, V2};
    spec.motion = Isometry2::translation(f.A - f.C);
    spec.cut = {f.C, C2};
    auto recs = rearrange(st, spec, "scalene/shift-strip", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  } else {
    // Tight ratio: the strip is the whole rectangle; shifting it is a pure
    // change of chart.
    reposition(st, Isometry2::translation(f.A - f.C));
    verify_planar_state(st, tol);
  }
  return rect_of(f);
}

void rect_to_triangle_scalene(PlanarState& st, Point2 A, Point2 B, Point2 C,
                              std::vector<StepRecord>& out, const Tol& tol) {
  TriangleFrame f = triangle_frame(A, B, C, tol);
  double scale = scale_of(st.footprint);
  double foot = dot(B - A, f.dir);
  double overshoot = foot - f.base;
  if (overshoot <= tol.at(scale) * 16)
    throw Error(Err::PreconditionViolated, "apex foot is not beyond the far base end");
  if (overshoot > 4 * f.base + tol.at(scale) * 64)
    throw Error(Err::PreconditionViolated, "apex overshoot exceeds four base lengths");

  double h = 0.5 * f.height;
  Point2 Yp = f.X * 2.0 - f.Y;
  Point2 V = midpoint(f.A, Yp);
  Point2 V1 = f.A + f.dir * dot(V - f.A, f.dir);
  Point2 V2 = V1 + f.normal * h;
  Point2 W = midpoint(f.C, f.Y);
  Point2 W1 = f.A + f.dir * dot(W - f.A, f.dir);
  Point2 W2 = W1 + f.normal * h;
  Point2 A2 = f.A + f.normal * h;
  Point2 C2 = f.C + f.normal * h;

  if (dist(V1, f.C) > tol.at(scale) * 64) {
    RearrangeSpec spec;
    spec.a1b1 = {f.A, A2};
    spec.a2b2 = {f.C, C2};
    spec.motion = Isometry2::translation(f.C - f.A);
    // When the rectangle is embedded in a larger footprint the base line is
    // an interior seam; the cut must continue along it to reach the boundary.
    if (point_in_polygon(V1, st.footprint, Tol{tol.eps * 256}) == PointSide::Boundary)
      spec.cut = {V2, V1};
    else
      spec.cut = {V2, V1, f.A};
    auto recs = rearrange(st, spec, "rev-scalene/shift-strip", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  } else {
    reposition(st, Isometry2::translation(f.C - f.A));
    verify_planar_state(st, tol);
  }
  {
    RearrangeSpec spec;
    spec.a1b1 = {W, W1};
    spec.a2b2 = {W, W2};
    spec.motion = Isometry2::rotation180(W);
    spec.cut = {W, f.C};
    auto recs = rearrange(st, spec, "rev-scalene/right-corner", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  {
    RearrangeSpec spec;
    spec.a1b1 = {V, V2};
    spec.a2b2 = {V, V1};
    spec.motion = Isometry2::rotation180(V);
    spec.cut = {V, Yp};
    auto recs = rearrange(st, spec, "rev-scalene/left-corner", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  {
    RearrangeSpec spec;
    spec.a1b1 = {f.X, Yp};
    spec.a2b2 = {f.X, f.Y};
    spec.motion = Isometry2::rotation180(f.X);
    spec.cut = {f.A, f.X};
    auto recs = rearrange(st, spec, "rev-scalene/to-triangle", tol);
    out.insert(out.end(), recs.begin(), recs.end());
  }
}

RectView halve_rectangle(PlanarState& st, const RectView& r,
                         std::vector<StepRecord>& out, const Tol& tol) {
  Point2 M0 = r.at(r.base / 2, 0);
  Point2 M1 = r.at(r.base / 2, r.height);
  Point2 P11 = r.at(r.base, r.height);
  Point2 P01 = r.at(0, r.height);
  RearrangeSpec spec;
  spec.a1b1 = {M1, P11};
  spec.a2b2 = {M1, P01};
  spec.motion = Isometry2::rotation180(M1);
  spec.cut = {M0, M1};
  auto recs = rearrange(st, spec, "halve", tol);
  out.insert(out.end(), recs.begin(), recs.end());
  RectView nv;
  nv.corner = r.corner;
  nv.dir = r.dir;
  nv.normal = r.normal;
  nv.base = r.base / 2;
  nv.height = 2 * r.height;
  return nv;
}

std::pair<int, Point2> projection_bound(const Point2& D1, const Point2& A,
                                        const Point2& B, const Point2& C,
                                        const Point2& D2, const Tol& tol) {
  Vec2 ac = C - A;
  Line2 ell(B, ac);
  double d1 = 1e300, d2 = 1e300;
  Point2 Q1, Q2;
  try {
    Q1 = line_intersection(Line2::through(D1, A), ell, tol);
    d1 = dist(Q1, B);
  } catch (const Error&) {
  }
  try {
    Q2 = line_intersection(Line2::through(D2, C), ell, tol);
    d2 = dist(Q2, B);
  } catch (const Error&) {
  }
  if (d1 >= 1e300 && d2 >= 1e300)
    throw Error(Err::NotConvex, "both neighbor edges parallel to the base");
  if (d2 <= d1 + tol.at(std::max(d1, 1.0))) return {2, Q2};
  return {1, Q1};
}

// ---------------------------------------------------------------------------
// Planner

PlanarPlanner::PlanarPlanner(const Polygon& polygon, const Tol& tol)
    : st_(make_double_cover_state(polygon, tol)), tol_(tol) {}

bool PlanarPlanner::footprint_is_square() const {
  auto r = footprint_as_rectangle();
  if (!r) return false;
  return std::abs(r->base - r->height) <= tol_.at(r->base) * 64;
}

std::optional<RectView> PlanarPlanner::footprint_as_rectangle() const {
  Polygon poly = remove_collinear(st_.footprint, tol_);
  if (poly.size() != 4) return std::nullopt;
  for (size_t i = 0; i < 4; ++i) {
    Vec2 u = poly[(i + 1) % 4] - poly[i];
    Vec2 v = poly[(i + 3) % 4] - poly[i];
    if (std::abs(dot(u, v)) > tol_.at(norm(u) * norm(v)) * 64) return std::nullopt;
  }
  RectView r;
  r.corner = poly[0];
  double a = dist(poly[0], poly[1]);
  double b = dist(poly[0], poly[3]);
  r.dir = (poly[1] - poly[0]) / a;
  r.normal = (poly[3] - poly[0]) / b;
  r.base = a;
  r.height = b;
  return r;
}

size_t PlanarPlanner::eliminate_vertex() {
  Polygon poly = remove_collinear(st_.footprint, tol_);
  size_t n = poly.size();
  if (n < 4) throw Error(Err::PreconditionViolated, "need at least four vertices");
  if (!is_convex(poly, tol_)) throw Error(Err::NotConvex, "footprint must be convex");
  size_t before = records_.size();
  // Largest interior angle = smallest cosine; ties to the lowest index.
  size_t bi = 0;
  double best = 2.0;
  for (size_t i = 0; i < n; ++i) {
    double c = interior_angle_cos(poly, i);
    if (c < best - tol_.at(1.0) * 16) {
      best = c;
      bi = i;
    }
  }
  Point2 B = poly[bi];
  Point2 A = poly[(bi + n - 1) % n];
  Point2 C = poly[(bi + 1) % n];
  Point2 D1 = poly[(bi + n - 2) % n];
  Point2 D2 = poly[(bi + 2) % n];
  auto [side, Q] = projection_bound(D1, A, B, C, D2, tol_);
  if (dist(Q, B) > dist(A, C) + tol_.at(dist(A, C)) * 128)
    throw Error(Err::NotConvex, "projection bound violated");
  // The smaller |QB| side is the default. If its apex foot lands within a
  // hair of a base endpoint the construction degenerates; switch sides when
  // the other intersection also satisfies the bound and is well conditioned.
  {
    auto conditioning = [&](const Point2& a, const Point2& q, const Point2& c) {
      Vec2 d = (c - a) / dist(a, c);
      double foot = dot(q - a, d);
      return std::min(std::abs(foot), std::abs(foot - dist(a, c)));
    };
    double margin = 1e-4 * dist(A, C);
    double eps_exact = tol_.at(dist(A, C)) * 64;
    double cond = side == 1 ? conditioning(C, Q, A) : conditioning(A, Q, C);
    if (cond > eps_exact && cond < margin) {
      int other = side == 1 ? 2 : 1;
      try {
        Point2 Qo = other == 1
                        ? line_intersection(Line2::through(D1, A), Line2(B, C - A), tol_)
                        : line_intersection(Line2::through(D2, C), Line2(B, C - A), tol_);
        double cond_o = other == 1 ? conditioning(C, Qo, A) : conditioning(A, Qo, C);
        if (dist(Qo, B) <= dist(A, C) + tol_.at(dist(A, C)) * 128 &&
            (cond_o <= eps_exact || cond_o >= margin)) {
          side = other;
          Q = Qo;
        }
      } catch (const Error&) {
      }
    }
  }
  if (side == 1) {
    std::swap(A, C);
    std::swap(D1, D2);
  }

  std::string prov = "eliminate[" + std::to_string(elimination_count_) + "]";
  std::vector<StepRecord> recs;
  triangle_to_rectangle_acute(st_, A, B, C, recs, tol_);
  // Attach triangle A-Q-C in place of the rectangle.
  TriangleFrame tq = triangle_frame(A, Q, C, tol_);
  double foot = dot(Q - A, tq.dir);
  if (foot >= -tol_.at(tq.base) * 64 && foot <= tq.base + tol_.at(tq.base) * 64) {
    rect_to_triangle_acute(st_, A, Q, C, recs, tol_);
  } else if (foot > tq.base) {
    rect_to_triangle_scalene(st_, A, Q, C, recs, tol_);
  } else {
    rect_to_triangle_scalene(st_, C, Q, A, recs, tol_);
  }
  for (auto& r : recs) r.provenance = prov + "/" + r.provenance;
  records_.insert(records_.end(), recs.begin(), recs.end());
  ++elimination_count_;

  Polygon after = remove_collinear(st_.footprint, tol_);
  if (after.size() != n - 1)
    throw Error(Err::PreconditionViolated,
                "elimination did not reduce the vertex count (" +
                    std::to_string(after.size()) + " vs " + std::to_string(n - 1) + ")");
  if (!is_convex(after, tol_))
    throw Error(Err::NotConvex, "elimination produced a non-convex footprint");
  return records_.size() - before;
}

RectView PlanarPlanner::triangle_to_rectangle() {
  Polygon poly = remove_collinear(st_.footprint, tol_);
  if (poly.size() != 3)
    throw Error(Err::PreconditionViolated, "footprint is not a triangle");
  // Longest side as the base guarantees the apex foot falls inside it.
  size_t base_edge = 0;
  double best = -1;
  for (size_t i = 0; i < 3; ++i) {
    double len = edge_length(poly, i);
    if (len > best) {
      best = len;
      base_edge = i;
    }
  }
  Point2 A = poly[base_edge];
  Point2 C = poly[(base_edge + 1) % 3];
  Point2 B = poly[(base_edge + 2) % 3];
  return triangle_to_rectangle_acute(st_, A, B, C, records_, tol_);
}

size_t PlanarPlanner::rectangle_to_square(RectView view) {
  size_t before = records_.size();
  auto transpose = [](const RectView& r) {
    RectView t;
    t.corner = r.corner + r.dir * r.base;
    t.dir = r.normal;
    t.normal = -r.dir;
    t.base = r.height;
    t.height = r.base;
    return t;
  };
  if (view.base < view.height) view = transpose(view);
  double side = std::sqrt(view.base * view.height);
  int guard = 0;
  while (std::abs(view.base - view.height) > tol_.at(side) * 64) {
    if (++guard > 64)
      throw Error(Err::PreconditionViolated, "square conversion stalled");
    double rho = view.base / view.height;
    if (rho > 5.0 + tol_.at(1.0)) {
      view = halve_rectangle(st_, view, records_, tol_);
      if (view.base < view.height) view = transpose(view);
      continue;
    }
    double a = view.base, h = view.height;
    (void)a;
    // Pivot through a triangle sharing the base, with the apex placed so the
    // new base has the wanted length: directly the square side when the
    // aspect is in [4,5], the double of it otherwise (giving aspect 4).
    double target = (rho >= 4.0 - tol_.at(1.0)) ? side : 2 * side;
    double x2 = target * target - 4 * h * h;
    double x = x2 > 0 ? std::sqrt(x2) : 0.0;
    Point2 A = view.corner;
    Point2 C = view.at(view.base, 0);
    Point2 apex = view.corner + view.dir * x + view.normal * (2 * h);
    rect_to_triangle_acute(st_, A, apex, C, records_, tol_);
    RectView nv = triangle_to_rectangle_acute(st_, A, C, apex, records_, tol_);
    view = nv;
    if (view.base < view.height) view = transpose(view);
  }
  return records_.size() - before;
}

void PlanarPlanner::run_to_square() {
  while (true) {
    Polygon poly = remove_collinear(st_.footprint, tol_);
    if (footprint_is_square()) return;
    auto rect = footprint_as_rectangle();
    if (rect) {
      rectangle_to_square(*rect);
      return;
    }
    if (poly.size() == 3) {
      RectView v = triangle_to_rectangle();
      rectangle_to_square(v);
      return;
    }
    eliminate_vertex();
  }
}

PlanarPlan plan_planar(const Polygon& polyP, const Polygon& polyQ, const Tol& tol) {
  Polygon p = remove_collinear(polyP, tol);
  Polygon q = remove_collinear(polyQ, tol);
  if (!is_convex(p, tol) || !is_convex(q, tol))
    throw Error(Err::NotConvex, "planar planning needs convex polygons");
  double ap = polygon_area(p), aq = polygon_area(q);
  if (std::abs(ap - aq) > tol.at(ap) * 16)
    throw Error(Err::AreaMismatch, "polygon areas differ: " + std::to_string(ap) +
                                       " vs " + std::to_string(aq));
  PlanarPlan plan;
  plan.square_side = std::sqrt(ap);
  PlanarPlanner pp(p, tol);
  pp.run_to_square();
  plan.p = {p, double_cover(p, tol), pp.records(), pp.footprint()};
  PlanarPlanner pq(q, tol);
  pq.run_to_square();
  plan.q = {q, double_cover(q, tol), pq.records(), pq.footprint()};
  return plan;
}

}  // namespace refold
