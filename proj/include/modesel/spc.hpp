// Satellite-pseudorange-consistency planes and the interval mixtures built
// from them. At urban scale the surface of constant pseudorange consistency
// is flat enough to linearize: the range offset at (x, y) on the receiver
// plane is a_x (x - x0) + a_y (y - y0) + c with (a_x, a_y) the horizontal
// components of the unit line-of-sight vector at the anchor. Modes project
// through that plane to intervals, intervals merge into per-satellite
// multi-interval uniform densities, and satellites combine with equal
// weights into the epoch's mixture model.
#pragma once

#include "shadow.hpp"

namespace modesel {

// Degenerate intervals are widened to +-kEpsilonWidth so MIUD densities
// stay finite for zenith-like geometry.
inline constexpr double kEpsilonWidth = 0.01;

struct SpcPlane {
  int sat_id = 0;
  double a_x = 0.0;  // m of range offset per m of east displacement
  double a_y = 0.0;
  double c = 0.0;  // meters, offset at the anchor
  Vec2 anchor;

  double offset_at(const Vec2& p) const {
    return a_x * (p.x - anchor.x) + a_y * (p.y - anchor.y) + c;
  }
};

struct RangeOffsetInterval {
  int sat_id = 0;
  int mode_id = 0;
  double lo = 0.0;
  double hi = 0.0;
};

// Multi-interval uniform distribution over the merged interval union.
struct Miud {
  int sat_id = 0;
  std::vector<std::pair<double, double>> intervals;  // disjoint, ascending
  double density = 0.0;                              // 1 / total length

  double total_length() const {
    double len = 0.0;
    for (const auto& [lo, hi] : intervals) len += hi - lo;
    return len;
  }
  bool supports(double b) const {
    for (const auto& [lo, hi] : intervals)
      if (b >= lo && b <= hi) return true;
    return false;
  }
  double pdf(double b) const { return supports(b) ? density : 0.0; }
};

struct MixtureModel {
  std::vector<Miud> miuds;  // equal weights 1/S

  std::size_t size() const { return miuds.size(); }
  double pdf(double b) const {
    double p = 0.0;
    for (const auto& m : miuds) p += m.pdf(b);
    return p / double(miuds.size());
  }
};

// Tangent-plane linearization of the pseudorange consistency at the anchor.
inline SpcPlane build_spc_plane(const SatelliteObservation& obs, const Vec2& anchor,
                                double receiver_plane_z) {
  const Vec3 a{anchor.x, anchor.y, receiver_plane_z};
  const Vec3 d = obs.position - a;
  const double r0 = d.norm();
  if (r0 < 1e6)
    throw std::runtime_error("spc: satellite below far field (range >= 1e6 m)");
  const Vec3 u = d * (1.0 / r0);
  return SpcPlane{obs.sat_id, u.x, u.y, obs.pseudorange - r0, anchor};
}

// Extremes of the plane over the mode's region: the satellite's range
// offset interval for this mode.
inline RangeOffsetInterval project_mode(const SpcPlane& plane, const Mode& mode) {
  const auto ex =
      linear_extremes(mode.region, plane.a_x, plane.a_y,
                      plane.c - plane.a_x * plane.anchor.x - plane.a_y * plane.anchor.y);
  return RangeOffsetInterval{plane.sat_id, mode.id, ex[0], ex[1]};
}

// Merge one satellite's mode intervals into a proper density. Overlaps are
// merged (union length, not summed lengths) and degenerate intervals are
// inflated to width 2 * kEpsilonWidth first.
inline Miud build_miud(const std::vector<RangeOffsetInterval>& intervals) {
  if (intervals.empty()) throw std::invalid_argument("miud: needs >= 1 interval");
  std::vector<std::pair<double, double>> spans;
  spans.reserve(intervals.size());
  for (const auto& iv : intervals) {
    double lo = iv.lo, hi = iv.hi;
    if (hi - lo < 1e-12) {
      const double mid = 0.5 * (lo + hi);
      lo = mid - kEpsilonWidth;
      hi = mid + kEpsilonWidth;
    }
    spans.emplace_back(lo, hi);
  }
  std::sort(spans.begin(), spans.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& s : spans) {
    if (!merged.empty() && s.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, s.second);
    else
      merged.push_back(s);
  }
  Miud m;
  m.sat_id = intervals.front().sat_id;
  m.intervals = std::move(merged);
  m.density = 1.0 / m.total_length();
  return m;
}

inline MixtureModel build_mixture(std::vector<Miud> miuds) {
  if (miuds.empty()) throw std::invalid_argument("mixture: needs >= 1 satellite");
  return MixtureModel{std::move(miuds)};
}

// Full per-epoch SPC bundle: one plane per satellite, the S*M interval
// table (satellite-major), and the equal-weight mixture.
struct SpcModel {
  std::vector<SpcPlane> planes;
  std::vector<RangeOffsetInterval> intervals;
  MixtureModel mixture;
};

inline SpcModel build_spc_model(const std::vector<SatelliteObservation>& observations,
                                const ModeSet& modes, const Vec2& anchor) {
  if (observations.empty())
    throw std::invalid_argument("spc model: needs >= 1 observation");
  SpcModel model;
  std::vector<Miud> miuds;
  for (const auto& obs : observations) {
    const SpcPlane plane = build_spc_plane(obs, anchor, modes.receiver_plane_z);
    std::vector<RangeOffsetInterval> ivs;
    ivs.reserve(modes.modes.size());
    for (const auto& m : modes.modes) ivs.push_back(project_mode(plane, m));
    miuds.push_back(build_miud(ivs));
    model.planes.push_back(plane);
    model.intervals.insert(model.intervals.end(), ivs.begin(), ivs.end());
  }
  model.mixture = build_mixture(std::move(miuds));
  return model;
}

}  // namespace modesel
