// Simplified shadow matching. Per-satellite GNSS shadows are cast on the
// receiver plane (central projection of each building through the satellite),
// LOS/NLOS is decided by direct ray tests, and a visibility vector carves the
// AOI into the disjoint candidate modes downstream inference consumes.
#pragma once

#include <functional>
#include <map>

#include "scene.hpp"

namespace modesel {

enum class Visibility { LOS, NLOS };

// Observed signal class per sat_id; one entry per observation in the epoch.
using VisibilityVector = std::map<int, Visibility>;

// Shadow offsets are capped at this reach so near-horizon satellites still
// produce finite (AOI-clipped) shadows instead of overflowing coordinates.
inline constexpr double kMaxShadowReach = 1e7;

namespace detail {

// Central projection of a roof vertex through the satellite onto z = plane_z.
inline Vec2 project_through(const Vec3& sat, const Vec3& v, double plane_z) {
  const Vec2 vxy{v.x, v.y};
  Vec2 q;
  if (sat.z <= v.z + kGeomTol) {
    // Satellite at or below the roof: shadow runs out to the reach cap.
    const Vec2 d = vxy - Vec2{sat.x, sat.y};
    const double len = d.norm();
    if (len == 0.0) return vxy;  // directly underneath; no lateral offset
    return vxy + d * (kMaxShadowReach / len);
  }
  const double t = (plane_z - sat.z) / (v.z - sat.z);
  q = Vec2{sat.x + (v.x - sat.x) * t, sat.y + (v.y - sat.y) * t};
  const Vec2 d = q - vxy;
  const double len = d.norm();
  if (len > kMaxShadowReach) q = vxy + d * (kMaxShadowReach / len);
  return q;
}

// Shadow of the whole scene as a boost multi-polygon, clipped to the AOI.
// Exact for convex prisms with base_z <= receiver plane < top_z: the hull of
// the footprint (wall cross-section at the receiver plane) and the projected
// roof equals the set of receiver points whose satellite ray is obstructed.
inline BMultiPoly shadow_multi(const Scene& scene, const Vec3& sat) {
  const double zr = scene.receiver_plane_z();
  if (sat.z <= zr + kGeomTol)
    throw std::runtime_error("satellite below horizon");

  BMultiPoly acc;
  for (const auto& b : scene.buildings()) {
    if (b.top_z <= zr + kGeomTol) continue;  // fully below the receiver plane
    std::vector<Vec2> pts;
    pts.reserve(b.footprint.vertices.size() * 2);
    for (const auto& v : b.footprint.vertices) {
      pts.push_back(v);
      pts.push_back(project_through(sat, {v.x, v.y, b.top_z}, zr));
    }
    const Polygon2 hull = convex_hull(pts);
    BPoly bp;
    append_snapped_ring(bp.outer(), hull.vertices);
    if (bp.outer().size() < 3) continue;
    bg::correct(bp);
    if (std::abs(bg::area(bp)) < 1e-12) continue;
    BMultiPoly merged;
    bg::union_(acc, bp, merged);
    acc = std::move(merged);
  }

  BMultiPoly clipped;
  bg::intersection(acc, to_boost(scene.aoi()), clipped);
  bg::remove_spikes(clipped);
  return clipped;
}

}  // namespace detail

// Region on the receiver plane where the ray to the satellite is obstructed.
inline Region2 shadow_region(const Scene& scene, const Vec3& sat) {
  return detail::from_boost(detail::shadow_multi(scene, sat));
}

// Direct LOS/NLOS decision for a receiver at (p, receiver_plane_z). A point
// hugging a building face (within kSnapTol) is conservatively NLOS.
inline Visibility classify_los(const Scene& scene, const Vec2& p,
                               const Vec3& sat) {
  const Vec3 a{p.x, p.y, scene.receiver_plane_z()};
  for (const auto& f : scene.face_polygons()) {
    const double da = f.plane().signed_distance(a);
    if (std::abs(da) <= kSnapTol) {
      if (f.contains(a, kSnapTol)) return Visibility::NLOS;
      continue;  // grazing the plane but off the face; crossing would be at t=0
    }
    if (segment_hits_polygon(a, sat, f)) return Visibility::NLOS;
  }
  return Visibility::LOS;
}

// One simple ring with optional interior holes; a mode is one or more such
// pieces (more than one only when components touch at isolated points).
struct ModePiece {
  Polygon2 outer;
  std::vector<Polygon2> holes;  // CCW-normalized rings

  double area() const {
    double a = outer.area();
    for (const auto& h : holes) a -= h.area();
    return a;
  }
  bool contains(const Vec2& p, double tol = kGeomTol) const {
    if (!point_in_polygon(outer, p, tol)) return false;
    for (const auto& h : holes)
      if (point_in_polygon(h, p, 0.0) && polygon_boundary_distance(h, p) > tol)
        return false;
    return true;
  }
};

struct Mode {
  int id = 0;
  std::vector<ModePiece> pieces;
  Region2 region;  // hole-free decomposition of `pieces`, for area sampling
  Vec2 centroid;
  double area = 0.0;

  bool contains(const Vec2& p, double tol = kGeomTol) const {
    for (const auto& piece : pieces)
      if (piece.contains(p, tol)) return true;
    return false;
  }
};

struct ModeSet {
  std::vector<Mode> modes;
  double receiver_plane_z = 0.0;

  // Index of the mode containing p, or -1. Modes are disjoint up to
  // tolerance, so the first match wins.
  int mode_containing(const Vec2& p, double tol = kGeomTol) const {
    for (const auto& m : modes)
      if (m.contains(p, tol)) return m.id;
    return -1;
  }
};

namespace detail {

// Union-find grouping of pieces whose boundaries come within `tol` of each
// other. Boolean output dissolves shared edges, so this only merges pieces
// meeting at isolated points (or split by numerical slivers).
inline std::vector<std::vector<std::size_t>> group_touching(
    const std::vector<ModePiece>& pieces, double tol) {
  const std::size_t n = pieces.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  auto rings_of = [](const ModePiece& p) {
    std::vector<const Polygon2*> rs{&p.outer};
    for (const auto& h : p.holes) rs.push_back(&h);
    return rs;
  };
  auto piece_distance = [&](const ModePiece& a, const ModePiece& b) {
    double best = 1e300;
    for (const Polygon2* ra : rings_of(a)) {
      const auto& va = ra->vertices;
      for (const Polygon2* rb : rings_of(b)) {
        const auto& vb = rb->vertices;
        for (std::size_t i = 0; i < va.size(); ++i) {
          const Vec2& a0 = va[i];
          const Vec2& a1 = va[(i + 1) % va.size()];
          for (std::size_t j = 0; j < vb.size(); ++j) {
            best = std::min(best,
                            dist_segment_segment(a0, a1, vb[j],
                                                 vb[(j + 1) % vb.size()]));
            if (best == 0.0) return best;
          }
        }
      }
    }
    return best;
  };

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (find(i) != find(j) && piece_distance(pieces[i], pieces[j]) <= tol)
        parent[find(i)] = find(j);

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  out.reserve(groups.size());
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

inline ModePiece piece_from_boost(const BPoly& poly) {
  ModePiece piece;
  piece.outer = ring_to_polygon(poly.outer());
  for (const auto& inner : poly.inners()) {
    Polygon2 h = ring_to_polygon(inner);
    if (h.vertices.size() >= 3 && h.area() > 1e-9) piece.holes.push_back(std::move(h));
  }
  return piece;
}

// Area-weighted centroid; if it falls outside the (non-convex) mode, fall
// back to the largest decomposed sub-piece, and finally to the largest
// triangle of its ear decomposition, whose centroid is always interior.
inline Vec2 mode_centroid(const std::vector<ModePiece>& pieces,
                          const Region2& region) {
  double total = 0.0;
  Vec2 acc{0, 0};
  for (const auto& piece : pieces) {
    const double ao = piece.outer.area();
    acc = acc + piece.outer.centroid() * ao;
    total += ao;
    for (const auto& h : piece.holes) {
      const double ah = h.area();
      acc = acc - h.centroid() * ah;
      total -= ah;
    }
  }
  if (total > 0.0) {
    const Vec2 c = acc * (1.0 / total);
    for (const auto& piece : pieces)
      if (piece.contains(c, kGeomTol)) return c;
  }

  const Polygon2* largest = nullptr;
  double best = -1.0;
  for (const auto& p : region.pieces)
    if (p.area() > best) {
      best = p.area();
      largest = &p;
    }
  if (!largest) throw std::runtime_error("centroid of empty mode");
  const Vec2 c2 = largest->centroid();
  if (point_in_polygon(*largest, c2, kGeomTol)) return c2;

  const auto tris = ear_clip(*largest);
  Vec2 best_c{0, 0};
  double tb = -1.0;
  for (const auto& t : tris) {
    const double a = std::abs((t[1] - t[0]).cross(t[2] - t[0])) * 0.5;
    if (a > tb) {
      tb = a;
      best_c = (t[0] + t[1] + t[2]) * (1.0 / 3.0);
    }
  }
  return best_c;
}

}  // namespace detail

// Carve the AOI by the observed visibility vector: subtract the shadow of
// every LOS satellite, intersect with the shadow of every NLOS satellite,
// then split the survivors into connected components ordered by area.
inline ModeSet modes_from_visibility(const Scene& scene,
                                     const VisibilityVector& vis,
                                     const std::map<int, Vec3>& sats,
                                     double min_mode_area = 1.0) {
  namespace bg = boost::geometry;
  detail::BMultiPoly feasible = detail::to_boost(scene.aoi());
  for (const auto& [sat_id, cls] : vis) {
    const auto it = sats.find(sat_id);
    if (it == sats.end())
      throw std::runtime_error("modes: missing position for sat_id " +
                               std::to_string(sat_id));
    const detail::BMultiPoly shadow = detail::shadow_multi(scene, it->second);
    detail::BMultiPoly next;
    if (cls == Visibility::LOS)
      bg::difference(feasible, shadow, next);
    else
      bg::intersection(feasible, shadow, next);
    bg::remove_spikes(next);
    feasible = std::move(next);
  }

  std::vector<ModePiece> pieces;
  for (const auto& poly : feasible) {
    ModePiece piece = detail::piece_from_boost(poly);
    if (piece.outer.vertices.size() >= 3 && piece.area() > 1e-9)
      pieces.push_back(std::move(piece));
  }

  std::vector<Mode> modes;
  for (const auto& group : detail::group_touching(pieces, kSnapTol)) {
    Mode m;
    detail::BMultiPoly mp;
    for (const std::size_t idx : group) {
      m.pieces.push_back(pieces[idx]);
      detail::BPoly bp;
      detail::append_snapped_ring(bp.outer(), pieces[idx].outer.vertices);
      for (const auto& h : pieces[idx].holes) {
        std::vector<Vec2> rev(h.vertices.rbegin(), h.vertices.rend());
        bp.inners().emplace_back();
        detail::append_snapped_ring(bp.inners().back(), rev);
      }
      bg::correct(bp);
      mp.push_back(std::move(bp));
    }
    m.region = detail::from_boost(mp);
    m.area = 0.0;
    for (const auto& piece : m.pieces) m.area += piece.area();
    if (m.area < min_mode_area || m.region.pieces.empty()) continue;
    m.centroid = detail::mode_centroid(m.pieces, m.region);
    modes.push_back(std::move(m));
  }

  if (modes.empty()) throw std::runtime_error("no feasible region");

  std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
    if (a.area != b.area) return a.area > b.area;
    if (a.centroid.x != b.centroid.x) return a.centroid.x < b.centroid.x;
    return a.centroid.y < b.centroid.y;
  });
  for (std::size_t i = 0; i < modes.size(); ++i) modes[i].id = int(i);
  return ModeSet{std::move(modes), scene.receiver_plane_z()};
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace jsonio {

inline json modeset_to_json(const ModeSet& ms) {
  json j;
  j["receiver_plane_z"] = ms.receiver_plane_z;
  json arr = json::array();
  for (const auto& m : ms.modes) {
    json jm;
    jm["id"] = m.id;
    jm["polygon"] = polygon2_to_json(m.pieces.front().outer);
    if (!m.pieces.front().holes.empty()) {
      json hs = json::array();
      for (const auto& h : m.pieces.front().holes) hs.push_back(polygon2_to_json(h));
      jm["holes"] = std::move(hs);
    }
    if (m.pieces.size() > 1) {
      // Point-touching components beyond the first ring.
      json extra = json::array();
      for (std::size_t i = 1; i < m.pieces.size(); ++i) {
        json je;
        je["polygon"] = polygon2_to_json(m.pieces[i].outer);
        if (!m.pieces[i].holes.empty()) {
          json hs = json::array();
          for (const auto& h : m.pieces[i].holes) hs.push_back(polygon2_to_json(h));
          je["holes"] = std::move(hs);
        }
        extra.push_back(std::move(je));
      }
      jm["extra_rings"] = std::move(extra);
    }
    jm["centroid"] = {m.centroid.x, m.centroid.y};
    arr.push_back(std::move(jm));
  }
  j["modes"] = std::move(arr);
  return j;
}

inline ModeSet modeset_from_json(const json& j) {
  for (const char* key : {"receiver_plane_z", "modes"})
    if (!j.contains(key))
      throw std::runtime_error(std::string("modeset: missing field '") + key +
                               "'");
  auto read_piece = [](const json& src) {
    ModePiece piece;
    piece.outer = polygon2_from_json(src.at("polygon"), "mode polygon");
    if (piece.outer.signed_area() < 0)
      std::reverse(piece.outer.vertices.begin(), piece.outer.vertices.end());
    if (src.contains("holes"))
      for (const auto& jh : src.at("holes")) {
        Polygon2 h = polygon2_from_json(jh, "mode hole");
        if (h.signed_area() < 0)
          std::reverse(h.vertices.begin(), h.vertices.end());
        piece.holes.push_back(std::move(h));
      }
    return piece;
  };

  namespace bg = boost::geometry;
  ModeSet ms;
  ms.receiver_plane_z = j.at("receiver_plane_z").get<double>();
  for (const auto& jm : j.at("modes")) {
    for (const char* key : {"id", "polygon", "centroid"})
      if (!jm.contains(key))
        throw std::runtime_error(std::string("mode: missing field '") + key +
                                 "'");
    Mode m;
    m.id = jm.at("id").get<int>();
    m.pieces.push_back(read_piece(jm));
    if (jm.contains("extra_rings"))
      for (const auto& je : jm.at("extra_rings")) m.pieces.push_back(read_piece(je));

    detail::BMultiPoly mp;
    for (const auto& piece : m.pieces) {
      detail::BPoly bp;
      detail::append_snapped_ring(bp.outer(), piece.outer.vertices);
      for (const auto& h : piece.holes) {
        std::vector<Vec2> rev(h.vertices.rbegin(), h.vertices.rend());
        bp.inners().emplace_back();
        detail::append_snapped_ring(bp.inners().back(), rev);
      }
      bg::correct(bp);
      mp.push_back(std::move(bp));
    }
    m.region = detail::from_boost(mp);
    m.area = 0.0;
    for (const auto& piece : m.pieces) m.area += piece.area();
    if (m.area <= 0.0 || m.region.pieces.empty())
      throw std::runtime_error("mode " + std::to_string(m.id) +
                               ": degenerate polygon");
    const auto& jc = jm.at("centroid");
    if (!jc.is_array() || jc.size() != 2)
      throw std::runtime_error("mode: centroid must be [x,y]");
    m.centroid = {jc[0].get<double>(), jc[1].get<double>()};
    ms.modes.push_back(std::move(m));
  }
  if (ms.modes.empty()) throw std::runtime_error("modeset: needs >= 1 mode");
  for (std::size_t i = 0; i < ms.modes.size(); ++i)
    if (ms.modes[i].id != int(i))
      throw std::runtime_error("modeset: mode ids must be 0-based and ordered");
  return ms;
}

}  // namespace jsonio

inline ModeSet load_modeset(const std::string& path) {
  return jsonio::modeset_from_json(jsonio::load_json_file(path));
}

inline void save_modeset(const std::string& path, const ModeSet& ms) {
  jsonio::save_json_file(path, jsonio::modeset_to_json(ms));
}

}  // namespace modesel
