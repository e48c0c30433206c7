#include "refold/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <set>

namespace refold {

namespace {

double scale_of(const Polygon& poly) {
  double s = 1.0;
  for (const auto& p : poly) s = std::max({s, std::abs(p.x), std::abs(p.y)});
  return s;
}

}  // namespace

const Face& Manifold::face(int id) const {
  for (const auto& f : faces)
    if (f.id == id) return f;
  throw Error(Err::InvalidInput, "no face with id " + std::to_string(id));
}

Face& Manifold::face(int id) {
  for (auto& f : faces)
    if (f.id == id) return f;
  throw Error(Err::InvalidInput, "no face with id " + std::to_string(id));
}

bool Manifold::has_face(int id) const {
  for (const auto& f : faces)
    if (f.id == id) return true;
  return false;
}

int Manifold::max_face_id() const {
  int m = -1;
  for (const auto& f : faces) m = std::max(m, f.id);
  return m;
}

double Manifold::total_area() const {
  double a = 0;
  for (const auto& f : faces) a += polygon_area(f.polygon);
  return a;
}

double face_edge_length(const Manifold& m, int face, int edge) {
  const Polygon& poly = m.face(face).polygon;
  return edge_length(poly, static_cast<size_t>(edge));
}

Point2 arc_point(const Manifold& m, const ArcRef& arc, double s) {
  const Polygon& poly = m.face(arc.face).polygon;
  size_t n = poly.size();
  const Point2& a = poly[static_cast<size_t>(arc.edge)];
  const Point2& b = poly[(static_cast<size_t>(arc.edge) + 1) % n];
  double len = dist(a, b);
  double t = (arc.t0 + s) / len;
  return a + (b - a) * t;
}

Segment2 arc_segment(const Manifold& m, const ArcRef& arc) {
  return {arc_point(m, arc, 0.0), arc_point(m, arc, arc.length())};
}

double partner_param(const GluedPair& g, bool arc_is_a, double s) {
  const ArcRef& self = arc_is_a ? g.a : g.b;
  (void)self;
  double len = (arc_is_a ? g.a : g.b).length();
  return g.reversed ? len - s : s;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate(const Manifold& m, const Tol& tol) {
  ValidationReport rep;
  rep.face_count = static_cast<int>(m.faces.size());
  std::set<int> ids;
  double total_edge_len = 0;
  for (const auto& f : m.faces) {
    if (!ids.insert(f.id).second) {
      rep.structure_ok = false;
      rep.issues.push_back("duplicate face id " + std::to_string(f.id));
    }
    if (f.polygon.size() < 3) {
      rep.structure_ok = false;
      rep.issues.push_back("face " + std::to_string(f.id) + " has fewer than 3 vertices");
      continue;
    }
    if (!is_simple(f.polygon, tol)) {
      rep.structure_ok = false;
      rep.issues.push_back("face " + std::to_string(f.id) + " is not simple");
      continue;
    }
    double sa = signed_area(f.polygon);
    if (sa <= tol.at(scale_of(f.polygon))) {
      rep.structure_ok = false;
      rep.issues.push_back("face " + std::to_string(f.id) +
                           " is not positively oriented with area > eps");
    }
    rep.area += std::abs(sa);
    for (size_t e = 0; e < f.polygon.size(); ++e)
      total_edge_len += edge_length(f.polygon, e);
  }

  // Arcs: in range, pairwise interior-disjoint per face, equal pair lengths.
  std::map<std::pair<int, int>, std::vector<std::pair<double, double>>> by_edge;
  for (const auto& g : m.gluing) {
    for (const ArcRef* arc : {&g.a, &g.b}) {
      if (!ids.count(arc->face)) {
        rep.structure_ok = false;
        rep.issues.push_back("gluing references missing face " + std::to_string(arc->face));
        continue;
      }
      const Polygon& poly = m.face(arc->face).polygon;
      if (arc->edge < 0 || static_cast<size_t>(arc->edge) >= poly.size()) {
        rep.structure_ok = false;
        rep.issues.push_back("gluing references invalid edge");
        continue;
      }
      double len = edge_length(poly, static_cast<size_t>(arc->edge));
      if (arc->t0 < -tol.at(len) || arc->t1 > len + tol.at(len) ||
          arc->t1 - arc->t0 <= tol.at(len)) {
        rep.structure_ok = false;
        rep.issues.push_back("arc interval out of range on face " +
                             std::to_string(arc->face));
      }
      by_edge[{arc->face, arc->edge}].push_back({arc->t0, arc->t1});
    }
    double la = g.a.length(), lb = g.b.length();
    if (std::abs(la - lb) > tol.at(la, lb)) {
      rep.structure_ok = false;
      rep.issues.push_back("glued arcs of unequal length");
    }
    if (g.a.face == g.b.face && g.a.edge == g.b.edge &&
        std::min(g.a.t1, g.b.t1) - std::max(g.a.t0, g.b.t0) > tol.at(la)) {
      rep.structure_ok = false;
      rep.issues.push_back("gluing pairs an arc with itself");
    }
    rep.glued_length += la;
  }
  for (auto& [key, spans] : by_edge) {
    std::sort(spans.begin(), spans.end());
    for (size_t i = 0; i + 1 < spans.size(); ++i) {
      if (spans[i].second > spans[i + 1].first + tol.at(spans[i].second)) {
        rep.structure_ok = false;
        rep.issues.push_back("overlapping arcs on face " + std::to_string(key.first));
      }
    }
  }

  rep.boundary_length = total_edge_len - 2.0 * rep.glued_length;
  // Closedness is a classifier: planner output may carry unglued slits a few
  // thousand ulps long.
  rep.closed = rep.boundary_length <= tol.at(total_edge_len) * 16384;

  // Connectivity over the gluing graph.
  if (!m.faces.empty()) {
    std::map<int, std::vector<int>> adj;
    for (const auto& g : m.gluing) {
      adj[g.a.face].push_back(g.b.face);
      adj[g.b.face].push_back(g.a.face);
    }
    std::set<int> seen;
    std::deque<int> queue{m.faces[0].id};
    seen.insert(m.faces[0].id);
    while (!queue.empty()) {
      int cur = queue.front();
      queue.pop_front();
      for (int nb : adj[cur])
        if (seen.insert(nb).second) queue.push_back(nb);
    }
    rep.connected = seen.size() == m.faces.size();
  }
  if (rep.area <= 0) {
    rep.structure_ok = false;
    rep.issues.push_back("total area is not positive");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Gluing surgery helpers

namespace {

// Splits any pair whose arc strictly contains parameter q on (face, edge).
// Works for any pair-shaped type with members a, b, reversed.
template <typename PairT>
void split_pairs_at(std::vector<PairT>& gluing, int face, int edge, double q,
                    const Tol& tol) {
  bool again = true;
  while (again) {
    again = false;
    for (size_t i = 0; i < gluing.size(); ++i) {
      PairT g = gluing[i];
      for (int side = 0; side < 2; ++side) {
        const ArcRef& arc = side == 0 ? g.a : g.b;
        double len = arc.length();
        if (arc.face != face || arc.edge != edge) continue;
        if (q <= arc.t0 + tol.at(len) || q >= arc.t1 - tol.at(len)) continue;
        double s = q - arc.t0;  // split parameter along the arc
        PairT first = g, second = g;
        ArcRef& fa = side == 0 ? first.a : first.b;
        ArcRef& fb = side == 0 ? first.b : first.a;
        ArcRef& sa = side == 0 ? second.a : second.b;
        ArcRef& sb = side == 0 ? second.b : second.a;
        fa.t1 = fa.t0 + s;
        sa.t0 = sa.t0 + s;
        if (!g.reversed) {
          fb.t1 = fb.t0 + s;
          sb.t0 = sb.t0 + s;
        } else {
          fb.t0 = fb.t1 - s;
          sb.t1 = sb.t1 - s;
        }
        gluing[i] = first;
        gluing.push_back(second);
        again = true;
        break;
      }
      if (again) break;
    }
  }
}

struct SubEdge {
  bool from_parent = true;
  int parent_edge = 0;
  double pt0 = 0, pt1 = 0;  // parent edge interval, forward
  int seam_index = 0;       // cut segment index
  bool seam_forward = true;
  Point2 p0, p1;
};

struct ChainWalk {
  std::vector<Point2> points;
  std::vector<SubEdge> subs;
  std::vector<size_t> passed_vertices;
};

ChainWalk boundary_chain(const Polygon& poly, const BoundaryPos& from,
                         const BoundaryPos& to, const Tol& tol) {
  ChainWalk w;
  size_t n = poly.size();
  Point2 start = boundary_point(poly, from);
  w.points.push_back(start);
  double len_f = edge_length(poly, from.edge);
  if (from.edge == to.edge && to.t > from.t + tol.at(len_f)) {
    w.points.push_back(boundary_point(poly, to));
    w.subs.push_back({true, static_cast<int>(from.edge), from.t, to.t, 0, true,
                      w.points[0], w.points[1]});
    return w;
  }
  // Partial first edge.
  {
    size_t nxt = (from.edge + 1) % n;
    if (from.t < len_f - tol.at(len_f)) {
      w.points.push_back(poly[nxt]);
      w.subs.push_back({true, static_cast<int>(from.edge), from.t, len_f, 0, true,
                        start, poly[nxt]});
    } else {
      // from.t snapped at the far vertex; start there instead
      w.points[0] = poly[nxt];
    }
    if (nxt != to.edge || to.t > tol.at(edge_length(poly, to.edge)))
      w.passed_vertices.push_back(nxt);
  }
  size_t e = (from.edge + 1) % n;
  for (size_t guard = 0; guard <= n + 1; ++guard) {
    if (e == to.edge) {
      double lt = edge_length(poly, e);
      if (to.t > tol.at(lt)) {
        Point2 end = boundary_point(poly, to);
        w.points.push_back(end);
        w.subs.push_back({true, static_cast<int>(e), 0.0, to.t, 0, true,
                          poly[e], end});
      }
      return w;
    }
    double le = edge_length(poly, e);
    size_t nxt = (e + 1) % n;
    w.points.push_back(poly[nxt]);
    w.subs.push_back({true, static_cast<int>(e), 0.0, le, 0, true, poly[e], poly[nxt]});
    if (nxt != to.edge || to.t > tol.at(edge_length(poly, to.edge)))
      w.passed_vertices.push_back(nxt);
    e = nxt;
  }
  throw Error(Err::InvalidInput, "boundary chain walk failed");
}

struct SplitOutcome {
  Face keep, fresh;
  std::vector<SubEdge> keep_edges, fresh_edges;
  std::vector<GlueSpec> seam_glue;
};

// Splits a face along a polyline; keeps track of where each child edge came
// from so gluings can be remapped exactly.
SplitOutcome split_face_geometry(const Face& f, const Polyline2& cut_in, int fresh_id,
                                 const Tol& tol) {
  const Polygon& poly = f.polygon;
  if (cut_in.size() < 2) throw Error(Err::InvalidInput, "cut polyline too short");
  auto p0 = locate_on_boundary(poly, cut_in.front(), Tol{tol.eps * 64});
  auto p1 = locate_on_boundary(poly, cut_in.back(), Tol{tol.eps * 64});
  if (!p0 || !p1)
    throw Error(Err::InvalidInput, "cut endpoints must lie on the face boundary");
  Polyline2 cut = cut_in;
  cut.front() = boundary_point(poly, *p0);
  cut.back() = boundary_point(poly, *p1);
  if (near(cut.front(), cut.back(), tol))
    throw Error(Err::InvalidInput, "cut endpoints coincide");
  for (size_t i = 1; i + 1 < cut.size(); ++i)
    if (point_in_polygon(cut[i], poly, tol) != PointSide::Inside)
      throw Error(Err::InvalidInput, "cut must stay inside the face");

  // Side A: boundary from cut end to cut start, then the cut forward.
  ChainWalk wa = boundary_chain(poly, *p1, *p0, tol);
  ChainWalk wb = boundary_chain(poly, *p0, *p1, tol);

  auto assemble = [&](const ChainWalk& w, bool seam_forward) {
    std::pair<Polygon, std::vector<SubEdge>> out;
    out.first = w.points;
    out.second = w.subs;
    size_t k = cut.size();
    if (seam_forward) {
      // append cut[1..k-1); sub edges over segments 0..k-2
      for (size_t i = 0; i + 1 < k; ++i) {
        if (i + 1 < k - 1) out.first.push_back(cut[i + 1]);
        SubEdge se;
        se.from_parent = false;
        se.seam_index = static_cast<int>(i);
        se.seam_forward = true;
        se.p0 = cut[i];
        se.p1 = cut[i + 1];
        out.second.push_back(se);
      }
    } else {
      for (size_t i = k - 1; i > 0; --i) {
        if (i > 1) out.first.push_back(cut[i - 1]);
        SubEdge se;
        se.from_parent = false;
        se.seam_index = static_cast<int>(i - 1);
        se.seam_forward = false;
        se.p0 = cut[i];
        se.p1 = cut[i - 1];
        out.second.push_back(se);
      }
    }
    return out;
  };

  auto [polyA, subsA] = assemble(wa, true);
  auto [polyB, subsB] = assemble(wb, false);
  if (polyA.size() < 3 || polyB.size() < 3 || signed_area(polyA) <= 0 ||
      signed_area(polyB) <= 0)
    throw Error(Err::InvalidInput, "cut does not split the face into two pieces");

  // Which side keeps the id: the one passing the smallest original vertex.
  bool a_keeps = true;
  {
    std::set<size_t> inA(wa.passed_vertices.begin(), wa.passed_vertices.end());
    std::set<size_t> inB(wb.passed_vertices.begin(), wb.passed_vertices.end());
    bool decided = false;
    for (size_t v = 0; v < poly.size() && !decided; ++v) {
      if (inA.count(v) && !inB.count(v)) { a_keeps = true; decided = true; }
      else if (inB.count(v) && !inA.count(v)) { a_keeps = false; decided = true; }
    }
    if (!decided) throw Error(Err::InvalidInput, "degenerate face split");
  }

  SplitOutcome out;
  if (a_keeps) {
    out.keep = {f.id, polyA};
    out.fresh = {fresh_id, polyB};
    out.keep_edges = subsA;
    out.fresh_edges = subsB;
  } else {
    out.keep = {f.id, polyB};
    out.fresh = {fresh_id, polyA};
    out.keep_edges = subsB;
    out.fresh_edges = subsA;
  }

  // Seam glue: for each cut segment, pair the two opposite child edges.
  for (size_t i = 0; i + 1 < cut.size(); ++i) {
    auto find_seam = [&](const std::vector<SubEdge>& subs, int face_id) {
      for (size_t e = 0; e < subs.size(); ++e)
        if (!subs[e].from_parent && subs[e].seam_index == static_cast<int>(i)) {
          double len = dist(subs[e].p0, subs[e].p1);
          return ArcRef{face_id, static_cast<int>(e), 0.0, len};
        }
      throw Error(Err::InvalidInput, "missing seam edge");
    };
    GlueSpec gs;
    gs.a = find_seam(out.keep_edges, out.keep.id);
    gs.b = find_seam(out.fresh_edges, out.fresh.id);
    gs.reversed = true;  // the two sides traverse the cut oppositely
    out.seam_glue.push_back(gs);
  }
  return out;
}

// Remaps an arc on the parent face to the child face structure.
ArcRef remap_arc(const ArcRef& arc, const SplitOutcome& split, const Tol& tol) {
  for (int which = 0; which < 2; ++which) {
    const auto& subs = which == 0 ? split.keep_edges : split.fresh_edges;
    int fid = which == 0 ? split.keep.id : split.fresh.id;
    for (size_t e = 0; e < subs.size(); ++e) {
      const SubEdge& se = subs[e];
      if (!se.from_parent || se.parent_edge != arc.edge) continue;
      double lo = se.pt0, hi = se.pt1;
      if (arc.t0 >= lo - tol.at(hi) && arc.t1 <= hi + tol.at(hi)) {
        return ArcRef{fid, static_cast<int>(e), arc.t0 - lo, arc.t1 - lo};
      }
    }
  }
  throw Error(Err::InvalidInput, "arc crosses a face split boundary");
}

}  // namespace

// ---------------------------------------------------------------------------
// apply_step

Manifold apply_step(const Manifold& m_in, const RefoldStep& step, AppliedStep* applied_out,
                    const Tol& tol) {
  Manifold m = m_in;
  AppliedStep applied;

  // Phase 1: sever glued coverage.
  for (const auto& cg : step.cut_gluings) {
    const ArcRef& span = cg.span;
    if (!m.has_face(span.face))
      throw Error(Err::InvalidInput, "cut references missing face");
    double elen = face_edge_length(m, span.face, span.edge);
    double q0 = std::max(0.0, span.t0), q1 = std::min(elen, span.t1);
    if (q1 - q0 <= tol.at(elen))
      throw Error(Err::InvalidInput, "empty cut span");
    split_pairs_at(m.gluing, span.face, span.edge, q0, tol);
    split_pairs_at(m.gluing, span.face, span.edge, q1, tol);
    double covered = 0;
    std::vector<GluedPair> keep;
    keep.reserve(m.gluing.size());
    for (const auto& g : m.gluing) {
      bool inside = false;
      for (const ArcRef* arc : {&g.a, &g.b}) {
        if (arc->face == span.face && arc->edge == span.edge &&
            arc->t0 >= q0 - tol.at(elen) && arc->t1 <= q1 + tol.at(elen)) {
          covered += arc->length();
          inside = true;
        }
      }
      if (inside) {
        applied.severed.push_back(g);
      } else {
        keep.push_back(g);
      }
    }
    if (std::abs(covered - (q1 - q0)) > 16 * tol.at(elen))
      throw Error(Err::InvalidInput,
                  "cut span is not fully glued (covered " + std::to_string(covered) +
                      " of " + std::to_string(q1 - q0) + ")");
    m.gluing = std::move(keep);
  }

  // Phase 2: interior cuts.
  int next_id = std::max(m.max_face_id(), m_in.max_face_id()) + 1;
  for (const auto& ci : step.cut_interiors) {
    const Face f = m.face(ci.face);
    // Pre-split gluings (and the step records tracking them) at the
    // parameters where the cut meets the boundary.
    for (const Point2& endpoint : {ci.polyline.front(), ci.polyline.back()}) {
      auto pos = locate_on_boundary(f.polygon, endpoint, Tol{tol.eps * 64});
      if (!pos) throw Error(Err::InvalidInput, "cut endpoint off the face boundary");
      if (pos->t > 0) {
        split_pairs_at(m.gluing, ci.face, static_cast<int>(pos->edge), pos->t, tol);
        split_pairs_at(applied.severed, ci.face, static_cast<int>(pos->edge), pos->t, tol);
        for (auto& rec : applied.splits)
          split_pairs_at(rec.seam_glue, ci.face, static_cast<int>(pos->edge), pos->t, tol);
      }
    }
    SplitOutcome split = split_face_geometry(f, ci.polyline, next_id++, tol);
    // Replace face, add the fresh one.
    for (auto& mf : m.faces)
      if (mf.id == ci.face) mf = split.keep;
    m.faces.push_back(split.fresh);
    auto remap_all = [&](std::vector<GluedPair>& pairs) {
      for (auto& g : pairs) {
        if (g.a.face == ci.face) g.a = remap_arc(g.a, split, tol);
        if (g.b.face == ci.face) g.b = remap_arc(g.b, split, tol);
      }
    };
    remap_all(m.gluing);
    remap_all(applied.severed);
    for (auto& rec : applied.splits)
      for (auto& gs : rec.seam_glue) {
        if (gs.a.face == ci.face) gs.a = remap_arc(gs.a, split, tol);
        if (gs.b.face == ci.face) gs.b = remap_arc(gs.b, split, tol);
      }
    FaceSplitRecord rec;
    rec.parent = ci.face;
    rec.child_keep = split.keep.id;
    rec.child_new = split.fresh.id;
    rec.polyline = ci.polyline;
    rec.seam_glue = split.seam_glue;
    applied.splits.push_back(rec);
  }

  // Connectivity of the cut surface.
  {
    std::map<int, std::vector<int>> adj;
    for (const auto& g : m.gluing) {
      adj[g.a.face].push_back(g.b.face);
      adj[g.b.face].push_back(g.a.face);
    }
    std::set<int> seen;
    if (!m.faces.empty()) {
      std::deque<int> queue{m.faces[0].id};
      seen.insert(m.faces[0].id);
      while (!queue.empty()) {
        int cur = queue.front();
        queue.pop_front();
        for (int nb : adj[cur])
          if (seen.insert(nb).second) queue.push_back(nb);
      }
    }
    if (seen.size() != m.faces.size())
      throw Error(Err::CutDisconnects, "cut phase disconnects the manifold");
  }

  // Phase 3: glues.
  for (const auto& gs : step.glues) {
    for (const ArcRef* arc : {&gs.a, &gs.b}) {
      if (!m.has_face(arc->face))
        throw Error(Err::InvalidInput, "glue references missing face");
      const Polygon& poly = m.face(arc->face).polygon;
      if (arc->edge < 0 || static_cast<size_t>(arc->edge) >= poly.size())
        throw Error(Err::InvalidInput, "glue references invalid edge");
      double len = edge_length(poly, static_cast<size_t>(arc->edge));
      if (arc->t0 < -tol.at(len) || arc->t1 > len + tol.at(len) ||
          arc->t1 - arc->t0 <= tol.at(len))
        throw Error(Err::InvalidInput, "glue arc out of range");
    }
    double la = gs.a.length(), lb = gs.b.length();
    if (std::abs(la - lb) > tol.at(la, lb) * 4)
      throw Error(Err::GlueLengthMismatch,
                  std::to_string(la) + " vs " + std::to_string(lb));
    // Target freedom.
    auto overlaps = [&](const ArcRef& x, const ArcRef& y) {
      if (x.face != y.face || x.edge != y.edge) return false;
      return std::min(x.t1, y.t1) - std::max(x.t0, y.t0) > tol.at(x.t1);
    };
    if (overlaps(gs.a, gs.b))
      throw Error(Err::InvalidInput, "glue would pair an arc with itself");
    for (const auto& g : m.gluing)
      for (const ArcRef* existing : {&g.a, &g.b})
        if (overlaps(*existing, gs.a) || overlaps(*existing, gs.b))
          throw Error(Err::GlueTargetNotFree, "arc already glued");
    GluedPair g{gs.a, gs.b, gs.reversed};
    m.gluing.push_back(g);
    applied.glued.push_back(g);
  }

  normalize_gluing(m, tol);
  if (std::abs(m.total_area() - m_in.total_area()) > tol.at(m_in.total_area()) * 8)
    throw Error(Err::AreaMismatch, "step changed total area");
  if (applied_out) *applied_out = applied;
  return m;
}

RefoldStep invert_step(const AppliedStep& applied) {
  RefoldStep inv;
  for (const auto& g : applied.glued) inv.cut_gluings.push_back({g.a});
  for (const auto& g : applied.severed)
    inv.glues.push_back({g.a, g.b, g.reversed});
  for (const auto& rec : applied.splits)
    for (const auto& gs : rec.seam_glue) inv.glues.push_back(gs);
  return inv;
}

// ---------------------------------------------------------------------------
// Normalization and comparison

namespace {

bool arc_less(const ArcRef& x, const ArcRef& y) {
  if (x.face != y.face) return x.face < y.face;
  if (x.edge != y.edge) return x.edge < y.edge;
  return x.t0 < y.t0;
}

}  // namespace

void normalize_gluing(Manifold& m, const Tol& tol) {
  for (auto& g : m.gluing)
    if (!arc_less(g.a, g.b)) std::swap(g.a, g.b);
  std::sort(m.gluing.begin(), m.gluing.end(), [](const GluedPair& x, const GluedPair& y) {
    if (x.a.face != y.a.face) return x.a.face < y.a.face;
    if (x.a.edge != y.a.edge) return x.a.edge < y.a.edge;
    if (x.a.t0 != y.a.t0) return x.a.t0 < y.a.t0;
    return arc_less(x.b, y.b);
  });
  std::vector<GluedPair> out;
  for (const auto& g : m.gluing) {
    if (!out.empty()) {
      GluedPair& p = out.back();
      bool same_edges = p.a.face == g.a.face && p.a.edge == g.a.edge &&
                        p.b.face == g.b.face && p.b.edge == g.b.edge &&
                        p.reversed == g.reversed;
      if (same_edges && std::abs(p.a.t1 - g.a.t0) <= tol.at(p.a.t1)) {
        bool b_contiguous = g.reversed
                                ? std::abs(g.b.t1 - p.b.t0) <= tol.at(p.b.t1)
                                : std::abs(p.b.t1 - g.b.t0) <= tol.at(p.b.t1);
        if (b_contiguous) {
          p.a.t1 = g.a.t1;
          if (g.reversed)
            p.b.t0 = g.b.t0;
          else
            p.b.t1 = g.b.t1;
          continue;
        }
      }
    }
    out.push_back(g);
  }
  m.gluing = std::move(out);
}

Manifold relabel_faces(const Manifold& m, const std::map<int, int>& id_map) {
  Manifold out = m;
  auto map_id = [&](int id) {
    auto it = id_map.find(id);
    return it == id_map.end() ? id : it->second;
  };
  for (auto& f : out.faces) f.id = map_id(f.id);
  for (auto& g : out.gluing) {
    g.a.face = map_id(g.a.face);
    g.b.face = map_id(g.b.face);
  }
  return out;
}

namespace {

// A candidate vertex correspondence between congruent polygons: vertex i of
// `a` maps to vertex (shift + i) of `b`, or (shift - i) when reflected.
struct PolyMatch {
  size_t shift = 0;
  bool reflected = false;
};

std::vector<PolyMatch> congruence_matches(const Polygon& a, const Polygon& b,
                                          const Tol& tol) {
  std::vector<PolyMatch> out;
  if (a.size() != b.size() || a.size() < 3) return out;
  size_t n = a.size();
  for (int refl = 0; refl < 2; ++refl) {
    for (size_t s = 0; s < n; ++s) {
      Isometry2 g;
      Point2 b0 = b[s % n];
      Point2 b1 = refl ? b[(s + n - 1) % n] : b[(s + 1) % n];
      Segment2 ea{a[0], a[1]};
      Segment2 eb{b0, b1};
      if (std::abs(ea.length() - eb.length()) > tol.at(ea.length())) continue;
      try {
        g = isometry_from_segment_pair(ea, eb, refl != 0, tol);
      } catch (const Error&) {
        continue;
      }
      bool ok = true;
      for (size_t i = 0; i < n && ok; ++i) {
        size_t j = refl ? (s + n - i) % n : (s + i) % n;
        ok = near(g(a[i]), b[j], tol);
      }
      if (ok) out.push_back({s, refl != 0});
    }
  }
  return out;
}

ArcRef transport_arc(const ArcRef& arc, const Polygon& from, const Polygon& to,
                     const PolyMatch& match) {
  size_t n = from.size();
  ArcRef out = arc;
  if (!match.reflected) {
    out.edge = static_cast<int>((match.shift + arc.edge) % n);
    // params preserved
  } else {
    // edge e (v_e -> v_{e+1}) maps to vertices (shift-e) -> (shift-e-1),
    // i.e. edge (shift-e-1) traversed backward.
    size_t e2 = (match.shift + 2 * n - arc.edge - 1) % n;
    out.edge = static_cast<int>(e2);
    double len = edge_length(to, e2);
    double nt0 = len - arc.t1;
    double nt1 = len - arc.t0;
    out.t0 = nt0;
    out.t1 = nt1;
  }
  return out;
}

bool arcs_match(const ArcRef& x, const ArcRef& y, double elen, const Tol& tol) {
  return x.face == y.face && x.edge == y.edge &&
         std::abs(x.t0 - y.t0) <= 64 * tol.at(elen) &&
         std::abs(x.t1 - y.t1) <= 64 * tol.at(elen);
}

}  // namespace

bool labeled_isomorphic(const Manifold& a_in, const Manifold& b_in, const Tol& tol) {
  Manifold a = a_in, b = b_in;
  normalize_gluing(a, tol);
  normalize_gluing(b, tol);
  if (a.faces.size() != b.faces.size()) return false;
  if (a.gluing.size() != b.gluing.size()) return false;

  std::vector<int> ids;
  for (const auto& f : a.faces) ids.push_back(f.id);
  std::sort(ids.begin(), ids.end());
  {
    std::vector<int> idsb;
    for (const auto& f : b.faces) idsb.push_back(f.id);
    std::sort(idsb.begin(), idsb.end());
    if (ids != idsb) return false;
  }

  // Candidate per-face correspondences.
  std::map<int, std::vector<PolyMatch>> cand;
  for (int id : ids) {
    cand[id] = congruence_matches(a.face(id).polygon, b.face(id).polygon, tol);
    if (cand[id].empty()) return false;
  }

  // Backtracking over faces in id order; checks every gluing pair whose two
  // faces are both assigned.
  std::map<int, PolyMatch> chosen;
  std::function<bool(size_t)> assign = [&](size_t k) -> bool {
    if (k == ids.size()) return true;
    int id = ids[k];
    for (const PolyMatch& pm : cand[id]) {
      chosen[id] = pm;
      bool ok = true;
      for (const auto& g : a.gluing) {
        if (!chosen.count(g.a.face) || !chosen.count(g.b.face)) continue;
        if (g.a.face != id && g.b.face != id) continue;
        ArcRef ta = transport_arc(g.a, a.face(g.a.face).polygon,
                                  b.face(g.a.face).polygon, chosen[g.a.face]);
        ArcRef tb = transport_arc(g.b, a.face(g.b.face).polygon,
                                  b.face(g.b.face).polygon, chosen[g.b.face]);
        bool rev = g.reversed != (chosen[g.a.face].reflected !=
                                  chosen[g.b.face].reflected);
        bool found = false;
        for (const auto& h : b.gluing) {
          double el = h.a.length();
          if (h.reversed == rev && arcs_match(h.a, ta, el, tol) &&
              arcs_match(h.b, tb, el, tol)) {
            found = true;
            break;
          }
          if (h.reversed == rev && arcs_match(h.a, tb, el, tol) &&
              arcs_match(h.b, ta, el, tol)) {
            found = true;
            break;
          }
        }
        if (!found) {
          ok = false;
          break;
        }
      }
      if (ok && assign(k + 1)) return true;
      chosen.erase(id);
    }
    return false;
  };
  return assign(0);
}

// ---------------------------------------------------------------------------
// merge_faces

namespace {

struct DirectedSub {
  Point2 p0, p1;
  int src_face;  // original face id
  int edge;
  double t0, t1;  // interval on that edge, traversed forward
};

}  // namespace

Manifold merge_faces(const Manifold& m_in, int keep_id, int other_id, const Tol& tol) {
  if (keep_id == other_id) throw Error(Err::InvalidInput, "merge needs two faces");
  Manifold m = m_in;
  normalize_gluing(m, tol);
  const Face fk = m.face(keep_id);
  const Face fo = m.face(other_id);

  // Gluings joining the two faces, with the transport each one induces.
  struct Contact {
    size_t pair_index;
    Isometry2 g;  // other-frame -> keep-frame
  };
  std::vector<Contact> contacts;
  for (size_t i = 0; i < m.gluing.size(); ++i) {
    const GluedPair& g = m.gluing[i];
    bool ab = g.a.face == keep_id && g.b.face == other_id;
    bool ba = g.a.face == other_id && g.b.face == keep_id;
    if (!ab && !ba) continue;
    const ArcRef& arcK = ab ? g.a : g.b;
    const ArcRef& arcO = ab ? g.b : g.a;
    double len = arcK.length();
    Segment2 segK{arc_point(m, arcK, 0.0), arc_point(m, arcK, len)};
    double s0 = g.reversed ? arcO.length() : 0.0;
    double s1 = g.reversed ? 0.0 : arcO.length();
    Segment2 segO{arc_point(m, arcO, s0), arc_point(m, arcO, s1)};
    Isometry2 iso = isometry_from_segment_pair(segO, segK, false, tol);
    contacts.push_back({i, iso});
  }
  if (contacts.empty())
    throw Error(Err::InvalidInput, "faces are not glued to each other");

  // Pick the transport consistent with the longest total contact.
  std::vector<std::pair<Isometry2, double>> groups;
  for (const auto& c : contacts) {
    double len = m.gluing[c.pair_index].a.length();
    bool merged = false;
    for (auto& gr : groups)
      if (isometries_equal(gr.first, c.g, tol)) {
        gr.second += len;
        merged = true;
        break;
      }
    if (!merged) groups.push_back({c.g, len});
  }
  Isometry2 g = groups[0].first;
  double best = groups[0].second;
  for (const auto& gr : groups)
    if (gr.second > best + tol.at(best)) {
      g = gr.first;
      best = gr.second;
    }
  if (g.improper)
    throw Error(Err::GluingInconsistent, "seam transport is orientation reversing");

  std::set<size_t> erased;  // contact pairs realized by g
  for (const auto& c : contacts)
    if (isometries_equal(c.g, g, tol)) erased.insert(c.pair_index);

  // Interiors must be disjoint under the transport. Edge contact along the
  // seam is expected; only transversal crossings indicate overlap.
  Polygon polyO = g(fo.polygon);
  {
    if (point_in_polygon(interior_point(fk.polygon, tol), polyO, tol) ==
            PointSide::Inside ||
        point_in_polygon(interior_point(polyO, tol), fk.polygon, tol) ==
            PointSide::Inside)
      throw Error(Err::OverlapViolation, "merged faces overlap");
    size_t nk = fk.polygon.size(), no = polyO.size();
    for (size_t i = 0; i < nk; ++i)
      for (size_t j = 0; j < no; ++j) {
        Segment2 s1{fk.polygon[i], fk.polygon[(i + 1) % nk]};
        Segment2 s2{polyO[j], polyO[(j + 1) % no]};
        auto o1 = orientation(s1.a, s1.b, s2.a, tol);
        auto o2 = orientation(s1.a, s1.b, s2.b, tol);
        auto o3 = orientation(s2.a, s2.b, s1.a, tol);
        auto o4 = orientation(s2.a, s2.b, s1.b, tol);
        bool proper = o1 != o2 && o3 != o4 && o1 != Orientation::Collinear &&
                      o2 != Orientation::Collinear &&
                      o3 != Orientation::Collinear && o4 != Orientation::Collinear;
        if (proper)
          throw Error(Err::OverlapViolation, "merged faces overlap along edges");
      }
  }

  // Uncovered boundary pieces of each face, as directed sub-edges.
  auto uncovered_subs = [&](const Face& f, bool is_keep) {
    std::vector<DirectedSub> subs;
    size_t n = f.polygon.size();
    for (size_t e = 0; e < n; ++e) {
      double len = edge_length(f.polygon, e);
      std::vector<std::pair<double, double>> covered;
      for (size_t idx : erased) {
        const GluedPair& p = m.gluing[idx];
        for (const ArcRef* arc : {&p.a, &p.b})
          if (arc->face == f.id && arc->edge == static_cast<int>(e))
            covered.push_back({arc->t0, arc->t1});
      }
      std::sort(covered.begin(), covered.end());
      double cur = 0.0;
      auto emit = [&](double a, double b) {
        if (b - a <= tol.at(len)) return;
        Point2 q0 = f.polygon[e] +
                    (f.polygon[(e + 1) % n] - f.polygon[e]) * (a / len);
        Point2 q1 = f.polygon[e] +
                    (f.polygon[(e + 1) % n] - f.polygon[e]) * (b / len);
        if (!is_keep) {
          q0 = g(q0);
          q1 = g(q1);
        }
        subs.push_back({q0, q1, f.id, static_cast<int>(e), a, b});
      };
      for (auto& c : covered) {
        emit(cur, c.first);
        cur = std::max(cur, c.second);
      }
      emit(cur, len);
    }
    return subs;
  };
  std::vector<DirectedSub> soup = uncovered_subs(fk, true);
  {
    auto so = uncovered_subs(fo, false);
    soup.insert(soup.end(), so.begin(), so.end());
  }
  if (soup.size() < 3) throw Error(Err::GluingInconsistent, "merge leaves no boundary");

  // Stitch the soup into one closed cycle.
  std::vector<DirectedSub> cycle;
  std::vector<bool> used(soup.size(), false);
  cycle.push_back(soup[0]);
  used[0] = true;
  for (size_t guard = 0; guard < soup.size(); ++guard) {
    const Point2 tail = cycle.back().p1;
    if (near(tail, cycle.front().p0, tol) && cycle.size() > 2) break;
    double bestd = 1e300;
    size_t bi = soup.size();
    for (size_t i = 0; i < soup.size(); ++i) {
      if (used[i]) continue;
      double d = dist(soup[i].p0, tail);
      if (d < bestd) {
        bestd = d;
        bi = i;
      }
    }
    if (bi == soup.size() || bestd > tol.at(scale_of(fk.polygon)) * 64)
      throw Error(Err::GluingInconsistent, "merge boundary does not close up");
    cycle.push_back(soup[bi]);
    used[bi] = true;
  }
  for (bool u : used)
    if (!u) throw Error(Err::GluingInconsistent, "merge would create a non-disk face");
  if (!near(cycle.back().p1, cycle.front().p0, tol))
    throw Error(Err::GluingInconsistent, "merge boundary does not close up");

  // Collapse collinear runs into polygon edges, keeping the remap table.
  struct NewEdge {
    Point2 p0, p1;
    std::vector<DirectedSub> parts;  // in order along the edge
  };
  std::vector<NewEdge> edges;
  for (const auto& ds : cycle) {
    if (!edges.empty()) {
      NewEdge& last = edges.back();
      Vec2 d1 = last.p1 - last.p0;
      Vec2 d2 = ds.p1 - ds.p0;
      if (std::abs(cross(normalized(d1), normalized(d2))) <= tol.at(1.0) * 16 &&
          dot(d1, d2) > 0) {
        last.parts.push_back(ds);
        last.p1 = ds.p1;
        continue;
      }
    }
    edges.push_back({ds.p0, ds.p1, {ds}});
  }
  // The seam between last and first edge may also be collinear.
  if (edges.size() > 2) {
    Vec2 d1 = edges.back().p1 - edges.back().p0;
    Vec2 d2 = edges.front().p1 - edges.front().p0;
    if (std::abs(cross(normalized(d1), normalized(d2))) <= tol.at(1.0) * 16 &&
        dot(d1, d2) > 0) {
      for (auto& part : edges.front().parts) edges.back().parts.push_back(part);
      edges.back().p1 = edges.front().p1;
      edges.erase(edges.begin());
    }
  }

  Face merged;
  merged.id = keep_id;
  for (const auto& e : edges) merged.polygon.push_back(e.p0);
  if (signed_area(merged.polygon) <= 0)
    throw Error(Err::GluingInconsistent, "merged face is not positively oriented");

  // Remap arcs referencing either old face.
  auto remap = [&](const ArcRef& arc) -> ArcRef {
    if (arc.face != keep_id && arc.face != other_id) return arc;
    for (size_t e = 0; e < edges.size(); ++e) {
      double off = 0.0;
      for (const auto& part : edges[e].parts) {
        if (part.src_face == arc.face && part.edge == arc.edge &&
            arc.t0 >= part.t0 - tol.at(part.t1) && arc.t1 <= part.t1 + tol.at(part.t1)) {
          return ArcRef{keep_id, static_cast<int>(e), off + (arc.t0 - part.t0),
                        off + (arc.t1 - part.t0)};
        }
        off += part.t1 - part.t0;
      }
    }
    throw Error(Err::GluingInconsistent, "gluing arc lost in merge");
  };

  Manifold out;
  for (const auto& f : m.faces) {
    if (f.id == other_id) continue;
    if (f.id == keep_id)
      out.faces.push_back(merged);
    else
      out.faces.push_back(f);
  }
  for (size_t i = 0; i < m.gluing.size(); ++i) {
    if (erased.count(i)) continue;
    GluedPair p = m.gluing[i];
    p.a = remap(p.a);
    p.b = remap(p.b);
    out.gluing.push_back(p);
  }
  normalize_gluing(out, tol);
  return out;
}

// ---------------------------------------------------------------------------
// Constructions

Manifold double_cover(const Polygon& polygon_in, const Tol& tol) {
  Polygon poly = remove_collinear(polygon_in, tol);
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  if (poly.size() < 3 || !is_simple(poly, tol))
    throw Error(Err::NonSimple, "double cover needs a simple polygon");
  size_t n = poly.size();
  Polygon mirror(n);
  for (size_t j = 0; j < n; ++j) {
    Point2 v = poly[(n - 1 - j) % n];
    mirror[j] = {v.x, -v.y};
  }
  Manifold m;
  m.faces.push_back({0, poly});
  m.faces.push_back({1, mirror});
  for (size_t e = 0; e < n; ++e) {
    size_t be = (2 * n - 2 - e) % n;
    double len = edge_length(poly, e);
    GluedPair g;
    g.a = {0, static_cast<int>(e), 0.0, len};
    g.b = {1, static_cast<int>(be), 0.0, len};
    g.reversed = true;
    m.gluing.push_back(g);
  }
  normalize_gluing(m, tol);
  return m;
}

Manifold box_surface(double ax, double ay, double az) {
  if (ax <= 0 || ay <= 0 || az <= 0)
    throw Error(Err::InvalidInput, "box dimensions must be positive");
  struct P3 {
    double x, y, z;
  };
  auto sub = [](P3 a, P3 b) { return P3{a.x - b.x, a.y - b.y, a.z - b.z}; };
  auto dot3 = [](P3 a, P3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; };
  // Six faces, corners listed CCW seen from outside.
  std::vector<std::array<P3, 4>> faces3;
  faces3.push_back({P3{0, 0, 0}, P3{0, ay, 0}, P3{ax, ay, 0}, P3{ax, 0, 0}});      // z=0
  faces3.push_back({P3{0, 0, az}, P3{ax, 0, az}, P3{ax, ay, az}, P3{0, ay, az}});  // z=az
  faces3.push_back({P3{0, 0, 0}, P3{ax, 0, 0}, P3{ax, 0, az}, P3{0, 0, az}});      // y=0
  faces3.push_back({P3{0, ay, 0}, P3{0, ay, az}, P3{ax, ay, az}, P3{ax, ay, 0}});  // y=ay
  faces3.push_back({P3{0, 0, 0}, P3{0, 0, az}, P3{0, ay, az}, P3{0, ay, 0}});      // x=0
  faces3.push_back({P3{ax, 0, 0}, P3{ax, ay, 0}, P3{ax, ay, az}, P3{ax, 0, az}});  // x=ax

  Manifold m;
  for (size_t i = 0; i < faces3.size(); ++i) {
    const auto& c = faces3[i];
    // Local frame: corner 0 at origin, first edge along +x.
    P3 u = sub(c[1], c[0]);
    double ulen = std::sqrt(dot3(u, u));
    P3 un{u.x / ulen, u.y / ulen, u.z / ulen};
    P3 w = sub(c[3], c[0]);
    double wlen = std::sqrt(dot3(w, w));
    P3 wn{w.x / wlen, w.y / wlen, w.z / wlen};
    Polygon poly;
    for (const auto& p : c) {
      P3 d = sub(p, c[0]);
      poly.push_back({dot3(d, un), dot3(d, wn)});
    }
    m.faces.push_back({static_cast<int>(i), poly});
  }
  // Glue edges sharing the same 3D segment.
  auto key = [&](P3 p) {
    return std::to_string(std::lround(p.x * 1024)) + "," +
           std::to_string(std::lround(p.y * 1024)) + "," +
           std::to_string(std::lround(p.z * 1024));
  };
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<int, int>>> edges;
  for (size_t i = 0; i < faces3.size(); ++i) {
    for (int e = 0; e < 4; ++e) {
      P3 a = faces3[i][static_cast<size_t>(e)];
      P3 b = faces3[i][static_cast<size_t>((e + 1) % 4)];
      auto ka = key(a), kb = key(b);
      auto k = ka < kb ? std::make_pair(ka, kb) : std::make_pair(kb, ka);
      edges[k].push_back({static_cast<int>(i), e});
    }
  }
  for (auto& [k, lst] : edges) {
    if (lst.size() != 2) throw Error(Err::InvalidInput, "box edge pairing failed");
    auto [f1, e1] = lst[0];
    auto [f2, e2] = lst[1];
    double len1 = face_edge_length(m, f1, e1);
    // Directions along the shared segment determine the flag.
    P3 a1 = faces3[static_cast<size_t>(f1)][static_cast<size_t>(e1)];
    P3 a2 = faces3[static_cast<size_t>(f2)][static_cast<size_t>(e2)];
    bool same_start = key(a1) == key(a2);
    GluedPair g;
    g.a = {f1, e1, 0.0, len1};
    g.b = {f2, e2, 0.0, len1};
    g.reversed = !same_start;
    m.gluing.push_back(g);
  }
  normalize_gluing(m);
  return m;
}

}  // namespace refold
