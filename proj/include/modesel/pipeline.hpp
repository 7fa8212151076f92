// Single-epoch orchestration: visibility vector -> feasible modes -> baseline
// SPC selection and the M-row consistency matrix -> enhanced selection. Pure
// given its inputs; all randomness flows from the caller's epoch stream so
// results are reproducible and independent of scheduling.
#pragma once

#include <chrono>

#include "multipath.hpp"
#include "selector.hpp"

namespace modesel {

struct PipelineConfig {
  std::size_t k = 1000;        // sample budget per mixture model
  double min_mode_area = 1.0;  // m^2, below this a region is discarded
};

struct Timing {
  double shadow_s = 0.0;
  double baseline_s = 0.0;
  double matrix_s = 0.0;
  double total_s = 0.0;
};

struct EpochOutcome {
  ModeSet mode_set;
  ConsistencyMatrix matrix;
  SelectionResult baseline;
  SelectionResult enhanced;
  Timing timing;
};

// Stream layout: substream(1) feeds the baseline posterior, substream(2+i)
// feeds consistency row i (substream(0) is reserved for the synthesis that
// produced the epoch). Adding or removing a mode therefore never perturbs
// another model's samples.
inline EpochOutcome run_epoch(const Scene& scene, const Epoch& epoch,
                              const VisibilityVector& visibility,
                              const PipelineConfig& cfg,
                              const RandomStream& rng) {
  using clock = std::chrono::steady_clock;
  const auto secs = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  std::map<int, Vec3> sats;
  for (const auto& obs : epoch.observations()) sats[obs.sat_id] = obs.position;
  if (visibility.size() != sats.size())
    throw std::invalid_argument("pipeline: visibility/epoch satellite mismatch");
  for (const auto& [id, v] : visibility)
    if (!sats.count(id))
      throw std::invalid_argument("pipeline: visibility/epoch satellite mismatch");

  EpochOutcome out;
  const auto t0 = clock::now();
  // Throws "no feasible region" when the visibility vector admits no mode.
  out.mode_set = modes_from_visibility(scene, visibility, sats, cfg.min_mode_area);
  const auto t1 = clock::now();
  out.baseline = select_baseline(epoch, out.mode_set, scene.aoi_centroid(),
                                 cfg.k, rng.substream(1));
  const auto t2 = clock::now();
  out.matrix = consistency_matrix(scene, epoch, out.mode_set, cfg.k, rng);
  out.enhanced = select_enhanced(out.matrix);
  const auto t3 = clock::now();

  out.timing.shadow_s = secs(t0, t1);
  out.timing.baseline_s = secs(t1, t2);
  out.timing.matrix_s = secs(t2, t3);
  out.timing.total_s = secs(t0, t3);
  return out;
}

}  // namespace modesel
