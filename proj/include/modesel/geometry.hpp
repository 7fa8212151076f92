// Geometric primitives for building-scale visibility and reflection analysis:
// ENU vectors, planes, planar 3D polygons, 2D polygons/regions with boolean
// operations, and extremes of linear functionals over polygonal regions.
//
// All coordinates are meters in a local East-North-Up frame. Tolerances are
// absolute: scenes span at most a few hundred meters.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

namespace modesel {

// Global tolerances. Geometric predicates, area comparisons, vertex snapping.
inline constexpr double kGeomTol = 1e-9;   // meters
inline constexpr double kAreaTol = 1e-6;   // square meters
inline constexpr double kSnapTol = 1e-6;   // meters

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(norm2()); }
  Vec3 normalized() const {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
    return {x / n, y / n, z / n};
  }
  Vec2 xy() const { return {x, y}; }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline double dist2(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Plane through `point` with unit normal. Outward for building faces.
struct Plane3 {
  Vec3 point;
  Vec3 unit_normal;

  Plane3() = default;
  Plane3(const Vec3& p, const Vec3& n) : point(p), unit_normal(n) {
    if (std::abs(n.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("plane normal must be unit length");
  }

  double signed_distance(const Vec3& p) const {
    return (p - point).dot(unit_normal);
  }
};

// Mirror a point across a plane. Involution; preserves distance to the plane.
inline Vec3 mirror_point(const Vec3& p, const Plane3& plane) {
  const double d = (p - plane.point).dot(plane.unit_normal);
  return p - plane.unit_normal * (2.0 * d);
}

// ---------------------------------------------------------------------------
// 2D polygons and regions
// ---------------------------------------------------------------------------

// Simple polygon, vertices counterclockwise, positive signed area.
struct Polygon2 {
  std::vector<Vec2> vertices;

  Polygon2() = default;
  explicit Polygon2(std::vector<Vec2> vs) : vertices(std::move(vs)) {}

  std::size_t size() const { return vertices.size(); }

  double signed_area() const {
    double a = 0.0;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = vertices[i];
      const Vec2& q = vertices[(i + 1) % n];
      a += p.cross(q);
    }
    return 0.5 * a;
  }

  double area() const { return std::abs(signed_area()); }

  Vec2 centroid() const {
    const std::size_t n = vertices.size();
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = vertices[i];
      const Vec2& q = vertices[(i + 1) % n];
      const double w = p.cross(q);
      a += w;
      cx += (p.x + q.x) * w;
      cy += (p.y + q.y) * w;
    }
    if (std::abs(a) < 1e-300) {
      // Degenerate: fall back to vertex mean.
      Vec2 m{0, 0};
      for (const auto& v : vertices) m = m + v;
      return m * (1.0 / double(n ? n : 1));
    }
    return {cx / (3.0 * a), cy / (3.0 * a)};
  }
};

inline double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return dist2(p, a);
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return dist2(p, a + ab * t);
}

inline double dist_segment_segment(const Vec2& a, const Vec2& b, const Vec2& c,
                                   const Vec2& d) {
  // Proper crossing means distance zero.
  const auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q - p).cross(r - p);
  };
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0))) return 0.0;
  return std::min(std::min(dist_point_segment(c, a, b), dist_point_segment(d, a, b)),
                  std::min(dist_point_segment(a, c, d), dist_point_segment(b, c, d)));
}

inline double polygon_boundary_distance(const Polygon2& poly, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    best = std::min(best, dist_point_segment(p, poly.vertices[i],
                                             poly.vertices[(i + 1) % n]));
  return best;
}

// Even-odd membership, boundary-inclusive within tol.
inline bool point_in_polygon(const Polygon2& poly, const Vec2& p,
                             double tol = kGeomTol) {
  const std::size_t n = poly.vertices.size();
  bool inside = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = poly.vertices[i];
    const Vec2& b = poly.vertices[(i + 1) % n];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xint = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xint) inside = !inside;
    }
  }
  if (inside) return true;
  return tol > 0.0 && polygon_boundary_distance(poly, p) <= tol;
}

// Union of disjoint-interior simple pieces. Pieces may share boundary
// (adjacent pieces arise from the hole decomposition of boolean results).
struct Region2 {
  std::vector<Polygon2> pieces;

  Region2() = default;
  explicit Region2(Polygon2 piece) { pieces.push_back(std::move(piece)); }
  explicit Region2(std::vector<Polygon2> ps) : pieces(std::move(ps)) {}

  bool empty() const { return pieces.empty(); }

  double area() const {
    double a = 0.0;
    for (const auto& p : pieces) a += p.area();
    return a;
  }

  bool contains(const Vec2& p, double tol = kGeomTol) const {
    for (const auto& piece : pieces)
      if (point_in_polygon(piece, p, tol)) return true;
    return false;
  }

  // Area-weighted centroid over all pieces. May fall outside a non-convex
  // region; callers needing an interior point must check.
  Vec2 centroid() const {
    double a = 0.0;
    Vec2 c{0, 0};
    for (const auto& p : pieces) {
      const double w = p.area();
      c = c + p.centroid() * w;
      a += w;
    }
    if (a <= 0.0) throw std::runtime_error("centroid of empty region");
    return c * (1.0 / a);
  }

  std::array<Vec2, 2> bbox() const {
    Vec2 lo{std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec2 hi{-lo.x, -lo.y};
    for (const auto& poly : pieces)
      for (const auto& v : poly.vertices) {
        lo.x = std::min(lo.x, v.x);
        lo.y = std::min(lo.y, v.y);
        hi.x = std::max(hi.x, v.x);
        hi.y = std::max(hi.y, v.y);
      }
    return {lo, hi};
  }
};

// Counterclockwise convex hull, collinear points dropped.
inline Polygon2 convex_hull(std::vector<Vec2> pts) {
  if (pts.size() < 3) throw std::invalid_argument("hull needs >= 3 points");
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) {
                          return a.x == b.x && a.y == b.y;
                        }),
            pts.end());
  const std::size_t n = pts.size();
  if (n < 3) throw std::invalid_argument("hull needs >= 3 distinct points");
  std::vector<Vec2> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && (h[k - 1] - h[k - 2]).cross(pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  if (h.size() < 3) throw std::invalid_argument("degenerate hull");
  return Polygon2{std::move(h)};
}

// Fan-free ear clipping of a simple CCW polygon into triangles.
inline std::vector<std::array<Vec2, 3>> ear_clip(const Polygon2& poly) {
  std::vector<Vec2> v = poly.vertices;
  std::vector<std::array<Vec2, 3>> tris;
  auto is_convex = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b - a).cross(c - a) > 0;
  };
  auto in_tri = [](const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d1 = (b - a).cross(p - a);
    const double d2 = (c - b).cross(p - b);
    const double d3 = (a - c).cross(p - c);
    return d1 >= 0 && d2 >= 0 && d3 >= 0;
  };
  int guard = 0;
  while (v.size() > 3 && guard++ < 10000) {
    bool clipped = false;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = v[(i + n - 1) % n];
      const Vec2& b = v[i];
      const Vec2& c = v[(i + 1) % n];
      if (!is_convex(a, b, c)) continue;
      bool ear = true;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i || j == (i + n - 1) % n || j == (i + 1) % n) continue;
        if (in_tri(v[j], a, b, c)) {
          ear = false;
          break;
        }
      }
      if (ear) {
        tris.push_back({a, b, c});
        v.erase(v.begin() + long(i));
        clipped = true;
        break;
      }
    }
    if (!clipped) break;  // numerically stuck; remaining polygon emitted below
  }
  if (v.size() == 3) tris.push_back({v[0], v[1], v[2]});
  return tris;
}

// ---------------------------------------------------------------------------
// Boolean operations (Boost.Geometry backend)
// ---------------------------------------------------------------------------

enum class BoolOp { Intersection, Difference, Union };

namespace detail {

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
using BPoly = bg::model::polygon<BPoint, false, false>;  // ccw, open
using BMultiPoly = bg::model::multi_polygon<BPoly>;

// Vertex grid for boolean inputs. Much finer than kSnapTol: it only has to
// collapse floating-point near-coincidence, and a 1e-6 grid would disturb
// piece areas by more than the kAreaTol additivity budget.
inline constexpr double kBoolGrid = 1e-9;

inline double snap(double v) { return std::round(v / kBoolGrid) * kBoolGrid; }

inline void append_snapped_ring(BPoly::ring_type& ring,
                                const std::vector<Vec2>& vs) {
  for (const auto& v : vs) {
    const BPoint p{snap(v.x), snap(v.y)};
    if (!ring.empty() && bg::get<0>(ring.back()) == bg::get<0>(p) &&
        bg::get<1>(ring.back()) == bg::get<1>(p))
      continue;
    ring.push_back(p);
  }
  while (ring.size() > 1 && bg::get<0>(ring.front()) == bg::get<0>(ring.back()) &&
         bg::get<1>(ring.front()) == bg::get<1>(ring.back()))
    ring.pop_back();
}

inline BMultiPoly to_boost(const Region2& r) {
  BMultiPoly out;
  for (const auto& piece : r.pieces) {
    BPoly bp;
    append_snapped_ring(bp.outer(), piece.vertices);
    if (bp.outer().size() < 3) continue;
    bg::correct(bp);
    if (std::abs(bg::area(bp)) < 1e-12) continue;
    out.push_back(std::move(bp));
  }
  return out;
}

inline Polygon2 ring_to_polygon(const BPoly::ring_type& ring) {
  std::vector<Vec2> vs;
  vs.reserve(ring.size());
  for (const auto& p : ring) {
    const Vec2 v{bg::get<0>(p), bg::get<1>(p)};
    if (!vs.empty() && vs.back().x == v.x && vs.back().y == v.y) continue;
    vs.push_back(v);
  }
  while (vs.size() > 1 && vs.front().x == vs.back().x &&
         vs.front().y == vs.back().y)
    vs.pop_back();

  // Overlay output can carry doubling-back excursions along edges the
  // operands shared; bg::remove_spikes catches the exact ones, this pass
  // also drops near-collinear reversals left by inexact crossings.
  bool changed = true;
  while (changed && vs.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const std::size_t n = vs.size();
      const Vec2 d1 = vs[i] - vs[(i + n - 1) % n];
      const Vec2 d2 = vs[(i + 1) % n] - vs[i];
      if (d1.dot(d2) < 0.0 &&
          std::abs(d1.cross(d2)) <= 1e-12 * d1.norm() * d2.norm()) {
        vs.erase(vs.begin() + std::ptrdiff_t(i));
        changed = true;
        break;
      }
    }
  }

  Polygon2 poly{std::move(vs)};
  if (poly.vertices.size() >= 3 && poly.signed_area() < 0)
    std::reverse(poly.vertices.begin(), poly.vertices.end());
  return poly;
}

// Split a polygon carrying interior rings into simple hole-free pieces by
// cutting through each hole. Each cut removes at least the first hole, so
// the recursion is bounded by the hole count.
inline void decompose(const BPoly& poly, std::vector<Polygon2>& out, int depth) {
  if (poly.inners().empty()) {
    Polygon2 piece = ring_to_polygon(poly.outer());
    if (piece.vertices.size() >= 3 && piece.area() > 1e-9)
      out.push_back(std::move(piece));
    return;
  }
  if (depth <= 0) throw std::logic_error("region decomposition did not converge");

  const auto& hole = poly.inners().front();
  double sx = 0, sy = 0, min_x = 1e300, max_x = -1e300, min_y = 1e300,
         max_y = -1e300;
  for (const auto& p : hole) {
    sx += bg::get<0>(p);
    sy += bg::get<1>(p);
    min_x = std::min(min_x, bg::get<0>(p));
    max_x = std::max(max_x, bg::get<0>(p));
    min_y = std::min(min_y, bg::get<1>(p));
    max_y = std::max(max_y, bg::get<1>(p));
  }
  const double nv = double(hole.size());
  const bool cut_vertical = (max_x - min_x) >= (max_y - min_y);

  bg::model::box<BPoint> bb;
  bg::envelope(poly, bb);
  const double pad = 1.0;
  const double x0 = bg::get<bg::min_corner, 0>(bb) - pad;
  const double x1 = bg::get<bg::max_corner, 0>(bb) + pad;
  const double y0 = bg::get<bg::min_corner, 1>(bb) - pad;
  const double y1 = bg::get<bg::max_corner, 1>(bb) + pad;

  auto make_rect = [](double ax, double ay, double bx, double by) {
    BPoly r;
    r.outer().push_back(BPoint{ax, ay});
    r.outer().push_back(BPoint{bx, ay});
    r.outer().push_back(BPoint{bx, by});
    r.outer().push_back(BPoint{ax, by});
    bg::correct(r);
    return r;
  };

  BPoly half_a, half_b;
  if (cut_vertical) {
    const double cut = sx / nv;
    half_a = make_rect(x0, y0, cut, y1);
    half_b = make_rect(cut, y0, x1, y1);
  } else {
    const double cut = sy / nv;
    half_a = make_rect(x0, y0, x1, cut);
    half_b = make_rect(x0, cut, x1, y1);
  }

  for (const BPoly* half : {&half_a, &half_b}) {
    BMultiPoly part;
    bg::intersection(poly, *half, part);
    for (const auto& sub : part) decompose(sub, out, depth - 1);
  }
}

inline Region2 from_boost(const BMultiPoly& mp) {
  BMultiPoly clean = mp;
  bg::remove_spikes(clean);
  std::vector<Polygon2> pieces;
  for (const auto& poly : clean)
    decompose(poly, pieces, int(poly.inners().size()) + 32);
  return Region2{std::move(pieces)};
}

}  // namespace detail

// Boolean operation on regions. Output pieces are disjoint simple polygons;
// holes arising from differences are decomposed into adjacent pieces.
// Degenerate (zero-area) results come back as the explicit empty region.
inline Region2 region_boolean(const Region2& a, const Region2& b, BoolOp op) {
  namespace bg = boost::geometry;
  const auto ma = detail::to_boost(a);
  const auto mb = detail::to_boost(b);
  detail::BMultiPoly res;
  switch (op) {
    case BoolOp::Intersection:
      bg::intersection(ma, mb, res);
      break;
    case BoolOp::Difference:
      bg::difference(ma, mb, res);
      break;
    case BoolOp::Union:
      bg::union_(ma, mb, res);
      break;
  }
  return detail::from_boost(res);
}

// Extremes of the linear functional a_x*x + a_y*y + c over a polygonal
// region. Attained at vertices of the pieces.
inline std::array<double, 2> linear_extremes(const Region2& region, double a_x,
                                             double a_y, double c) {
  if (region.empty()) throw std::runtime_error("empty mode");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& piece : region.pieces)
    for (const auto& v : piece.vertices) {
      const double f = a_x * v.x + a_y * v.y + c;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
    }
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Planar 3D polygons
// ---------------------------------------------------------------------------

// Planar polygon in 3D, counterclockwise when viewed from the outward
// normal side (Newell normal of the vertex order).
class Polygon3 {
 public:
  Polygon3() = default;

  explicit Polygon3(std::vector<Vec3> vertices) : vertices_(std::move(vertices)) {
    if (vertices_.size() < 3)
      throw std::invalid_argument("polygon needs >= 3 vertices");
    Vec3 n{0, 0, 0};
    Vec3 centroid{0, 0, 0};
    const std::size_t nv = vertices_.size();
    for (std::size_t i = 0; i < nv; ++i) {
      const Vec3& p = vertices_[i];
      const Vec3& q = vertices_[(i + 1) % nv];
      n.x += (p.y - q.y) * (p.z + q.z);
      n.y += (p.z - q.z) * (p.x + q.x);
      n.z += (p.x - q.x) * (p.y + q.y);
      centroid = centroid + p;
    }
    if (n.norm() == 0.0) throw std::invalid_argument("degenerate polygon");
    centroid_ = centroid * (1.0 / double(nv));
    plane_ = Plane3(centroid_, n.normalized());
    for (const auto& v : vertices_)
      if (std::abs(plane_.signed_distance(v)) > 1e-9)
        throw std::invalid_argument("polygon vertices not coplanar");
    // Orthonormal in-plane basis for 2D projection.
    Vec3 ref = std::abs(plane_.unit_normal.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    u_ = plane_.unit_normal.cross(ref).normalized();
    v_ = plane_.unit_normal.cross(u_);
    proj2d_.vertices.reserve(nv);
    for (const auto& v : vertices_) proj2d_.vertices.push_back(project(v));
    if (proj2d_.signed_area() < 0) {
      // Basis handedness flipped relative to the normal; swap axes.
      std::swap(u_, v_);
      for (std::size_t i = 0; i < nv; ++i)
        proj2d_.vertices[i] = project(vertices_[i]);
    }
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const Plane3& plane() const { return plane_; }
  const Vec3& centroid() const { return centroid_; }

  // Membership for a point assumed on the supporting plane.
  bool contains(const Vec3& p, double tol = kGeomTol) const {
    return point_in_polygon(proj2d_, project(p), tol);
  }

  std::array<Vec3, 2> bbox() const {
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (const auto& v : vertices_) {
      lo.x = std::min(lo.x, v.x);
      lo.y = std::min(lo.y, v.y);
      lo.z = std::min(lo.z, v.z);
      hi.x = std::max(hi.x, v.x);
      hi.y = std::max(hi.y, v.y);
      hi.z = std::max(hi.z, v.z);
    }
    return {lo, hi};
  }

 private:
  Vec2 project(const Vec3& p) const {
    const Vec3 d = p - plane_.point;
    return {d.dot(u_), d.dot(v_)};
  }

  std::vector<Vec3> vertices_;
  Plane3 plane_;
  Vec3 centroid_;
  Vec3 u_, v_;
  Polygon2 proj2d_;
};

// Intersection of the open segment (a,b) with the polygon's supporting
// plane, if that point lies inside the polygon (edge-inclusive within
// kGeomTol). Segments coplanar with the polygon yield empty.
inline std::optional<Vec3> segment_hits_polygon(const Vec3& a, const Vec3& b,
                                                const Polygon3& poly) {
  const Plane3& pl = poly.plane();
  const double da = pl.signed_distance(a);
  const double db = pl.signed_distance(b);
  if (da == db) return std::nullopt;  // parallel (coplanar included)
  if (da > 0.0 && db > 0.0) return std::nullopt;
  if (da < 0.0 && db < 0.0) return std::nullopt;
  const double t = da / (da - db);
  if (t <= 0.0 || t >= 1.0) return std::nullopt;
  const Vec3 x = a + (b - a) * t;
  if (!poly.contains(x)) return std::nullopt;
  return x;
}

// True iff any non-excluded face intersects the open segment, with contacts
// closer than kGeomTol to an endpoint ignored. `exclude` holds indices into
// `faces`, sorted or not.
inline bool segment_occluded(const Vec3& a, const Vec3& b,
                             const std::vector<Polygon3>& faces,
                             const std::vector<int>& exclude = {}) {
  for (std::size_t i = 0; i < faces.size(); ++i) {
    if (std::find(exclude.begin(), exclude.end(), int(i)) != exclude.end())
      continue;
    const auto hit = segment_hits_polygon(a, b, faces[i]);
    if (!hit) continue;
    if ((*hit - a).norm() <= kGeomTol || (*hit - b).norm() <= kGeomTol) continue;
    return true;
  }
  return false;
}

}  // namespace modesel
