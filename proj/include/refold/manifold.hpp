#pragma once

#include <map>
#include <unordered_map>

#include "refold/polygon.hpp"

namespace refold {

// A surface built from flat polygon faces, each in its own local frame,
// with equal-length boundary arcs glued in pairs. Arcs never span polygon
// corners: an arc is a sub-interval of one edge, parameterized by arc
// length along the counterclockwise boundary of its face.

struct Face {
  int id = 0;
  Polygon polygon;  // simple, CCW, in the face's local frame
};

struct ArcRef {
  int face = 0;
  int edge = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  double length() const { return t1 - t0; }
};

struct GluedPair {
  ArcRef a, b;
  // reversed=false identifies parameter s on a with s on b;
  // reversed=true identifies s with length-s.
  bool reversed = false;
};

struct Manifold {
  std::vector<Face> faces;
  std::vector<GluedPair> gluing;

  const Face& face(int id) const;
  Face& face(int id);
  bool has_face(int id) const;
  int max_face_id() const;
  double total_area() const;
};

struct ValidationReport {
  bool structure_ok = true;  // faces simple/CCW, arcs valid, involution holds
  bool connected = false;
  bool closed = false;
  double area = 0.0;
  double boundary_length = 0.0;
  double glued_length = 0.0;
  int face_count = 0;
  std::vector<std::string> issues;
  bool ok() const { return structure_ok && connected; }
};

ValidationReport validate(const Manifold& m, const Tol& tol = {});

// --- Refolding steps -------------------------------------------------------

// Severs all glued coverage inside the given span (the span must be fully
// glued). Pairs partially covered are split first.
struct CutGluingSpec {
  ArcRef span;
};

// Cuts a face along a polyline whose endpoints lie on the face boundary,
// splitting it into two faces. The piece containing the first boundary
// point of the original polygon that is off the cut keeps the face id; the
// other piece receives a fresh id.
struct CutInteriorSpec {
  int face = 0;
  Polyline2 polyline;
};

struct GlueSpec {
  ArcRef a, b;
  bool reversed = false;
};

struct RefoldStep {
  std::vector<CutGluingSpec> cut_gluings;
  std::vector<CutInteriorSpec> cut_interiors;
  std::vector<GlueSpec> glues;
  bool empty() const {
    return cut_gluings.empty() && cut_interiors.empty() && glues.empty();
  }
};

// Record of what an applied step actually did, in enough detail to invert it.
struct FaceSplitRecord {
  int parent = 0;
  int child_keep = 0;  // same id as parent
  int child_new = 0;
  Polyline2 polyline;                // in the parent's local frame
  std::vector<GlueSpec> seam_glue;   // pairs rejoining the two cut sides
};

struct AppliedStep {
  std::vector<GluedPair> severed;
  std::vector<FaceSplitRecord> splits;
  std::vector<GluedPair> glued;
};

// Applies cuts (gluing cuts, then interior cuts in list order), verifies the
// cut surface stays connected, then applies glues. Transactional: the input
// manifold is never modified; errors leave no trace.
Manifold apply_step(const Manifold& m, const RefoldStep& step,
                    AppliedStep* applied = nullptr, const Tol& tol = {});

// The step undoing an applied step: cut what was glued, reglue what was
// severed, and rejoin split faces along their seams. Re-applying leaves the
// split face structure in place; merge_faces restores the original faces.
RefoldStep invert_step(const AppliedStep& applied);

// --- Comparison and normalization ------------------------------------------

// Face-id-respecting equality up to a per-face isometry. Gluing structures
// are compared after normalization (adjacent compatible pairs merged), with
// arc intervals matching within tolerance.
bool labeled_isomorphic(const Manifold& a, const Manifold& b, const Tol& tol = {});

// Erases the seam between two faces glued along matching boundary portions:
// transports `other` onto `keep` by the proper isometry realizing their
// gluing, verifies disjoint interiors, and replaces both faces by the union
// polygon (straight seam vertices dropped). All other gluings are remapped.
Manifold merge_faces(const Manifold& m, int keep_id, int other_id,
                     const Tol& tol = {});

// Merges contiguous glued pairs; idempotent canonical granularity.
void normalize_gluing(Manifold& m, const Tol& tol = {});

// Applies a relabeling map (old id -> new id) to faces and gluing refs.
Manifold relabel_faces(const Manifold& m, const std::map<int, int>& id_map);

// --- Constructions ----------------------------------------------------------

// Two mirror copies of a polygon glued along all corresponding edges.
// Face 0 carries the polygon itself, face 1 its mirror image.
Manifold double_cover(const Polygon& polygon, const Tol& tol = {});

// The surface of an axis-aligned box (six rectangle faces, ids 0..5).
Manifold box_surface(double ax, double ay, double az);

// --- Arc helpers ------------------------------------------------------------

double face_edge_length(const Manifold& m, int face, int edge);
Point2 arc_point(const Manifold& m, const ArcRef& arc, double s);  // s in [0,len]
Segment2 arc_segment(const Manifold& m, const ArcRef& arc);
// Point on the partner arc matching parameter s of `arc` in pair `g`.
double partner_param(const GluedPair& g, bool arc_is_a, double s);

}  // namespace refold
