// Per-mode multipath-error estimation by the specular image method. For an
// NLOS satellite the candidate receiver (mode centroid) may still be reached
// by a single wall reflection: mirror the satellite across each illuminated
// wall, intersect the mirrored line of sight with the wall, and keep paths
// whose two legs are unobstructed. The shortest such path arrives first; its
// excess over the direct distance is the multipath delay used to correct the
// pseudorange before rebuilding the SPC model.
#pragma once

#include "spc.hpp"

namespace modesel {

struct PropagationPath {
  int sat_id = 0;
  int face_id = 0;
  Vec3 reflection_point;
  double length = 0.0;  // |candidate -> reflection| + |reflection -> satellite|
};

enum class CorrectionStatus { LOS, Corrected, NoPath };

struct MultipathEstimate {
  int sat_id = 0;
  CorrectionStatus status = CorrectionStatus::LOS;
  double delay = 0.0;  // meters, nonzero only when corrected
  double corrected_pseudorange = 0.0;
};

// Walls illuminated by the satellite: outward normal has a positive
// component toward it. Roofs never reflect toward the ground.
inline std::vector<int> reflection_candidate_faces(const Scene& scene,
                                                   const Vec3& sat) {
  std::vector<int> out;
  for (const auto& f : scene.faces()) {
    if (f.is_top) continue;
    const Vec3 v = (sat - f.polygon.centroid()).normalized();
    if (f.plane().unit_normal.dot(v) > 0.0) out.push_back(f.id);
  }
  return out;
}

// All single-reflection paths from the candidate to the satellite. The
// reflecting face is excluded from its own leg tests; every other face in
// the scene (including the same building's) can block a leg.
inline std::vector<PropagationPath> find_paths(const Scene& scene,
                                               const Vec3& candidate,
                                               const SatelliteObservation& obs) {
  std::vector<PropagationPath> paths;
  const auto& polys = scene.face_polygons();
  for (const int fid : reflection_candidate_faces(scene, obs.position)) {
    const Polygon3& face = polys[std::size_t(fid)];
    const Vec3 mirrored = mirror_point(obs.position, face.plane());
    const auto hit = segment_hits_polygon(candidate, mirrored, face);
    if (!hit) continue;
    if (segment_occluded(candidate, *hit, polys, {fid})) continue;
    if (segment_occluded(*hit, obs.position, polys, {fid})) continue;
    paths.push_back(PropagationPath{obs.sat_id, fid, *hit,
                                    (candidate - mirrored).norm()});
  }
  return paths;
}

// Correct each observation under the hypothesis that the receiver sits at
// `candidate`. LOS satellites pass through; NLOS satellites get the shortest
// reflected path's excess as delay, or are skipped when no single-reflection
// path exists.
inline std::vector<MultipathEstimate> estimate_corrections_at(
    const Scene& scene, const Vec3& candidate, const Epoch& epoch) {
  std::vector<MultipathEstimate> out;
  out.reserve(epoch.size());
  for (const auto& obs : epoch.observations()) {
    MultipathEstimate est;
    est.sat_id = obs.sat_id;
    est.corrected_pseudorange = obs.pseudorange;
    if (classify_los(scene, candidate.xy(), obs.position) == Visibility::LOS) {
      est.status = CorrectionStatus::LOS;
      out.push_back(est);
      continue;
    }
    const auto paths = find_paths(scene, candidate, obs);
    if (paths.empty()) {
      est.status = CorrectionStatus::NoPath;
      out.push_back(est);
      continue;
    }
    double shortest = paths.front().length;
    for (const auto& p : paths) shortest = std::min(shortest, p.length);
    const double direct = (obs.position - candidate).norm();
    est.status = CorrectionStatus::Corrected;
    est.delay = std::max(0.0, shortest - direct);
    est.corrected_pseudorange = obs.pseudorange - est.delay;
    out.push_back(est);
  }
  return out;
}

inline std::vector<MultipathEstimate> estimate_corrections(const Scene& scene,
                                                           const Mode& mode,
                                                           const Epoch& epoch) {
  const Vec3 candidate{mode.centroid.x, mode.centroid.y,
                       scene.receiver_plane_z()};
  return estimate_corrections_at(scene, candidate, epoch);
}

// The SPC model rebuilt from pseudoranges corrected under one assumed mode.
struct EnhancedModel {
  std::vector<MultipathEstimate> estimates;  // per satellite, epoch order
  SpcModel spc;
};

inline EnhancedModel build_enhanced_model(const Scene& scene, const ModeSet& modes,
                                          const Epoch& epoch,
                                          const Mode& assumed_mode) {
  EnhancedModel em;
  em.estimates = estimate_corrections(scene, assumed_mode, epoch);
  std::vector<SatelliteObservation> corrected = epoch.observations();
  for (std::size_t i = 0; i < corrected.size(); ++i)
    corrected[i].pseudorange = em.estimates[i].corrected_pseudorange;
  em.spc = build_spc_model(corrected, modes, scene.aoi_centroid());
  return em;
}

inline MixtureModel build_enhanced_mixture(const Scene& scene, const ModeSet& modes,
                                           const Epoch& epoch,
                                           const Mode& assumed_mode) {
  return build_enhanced_model(scene, modes, epoch, assumed_mode).spc.mixture;
}

}  // namespace modesel
