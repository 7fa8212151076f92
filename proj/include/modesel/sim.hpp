// Deterministic synthetic scenarios: street-canyon scenes, stratified
// constellations, and truth-consistent pseudorange synthesis (direct range
// for LOS satellites, shortest single-reflection path for NLOS ones, plus
// clock bias and Gaussian noise). Batches derive one child stream per epoch
// from the root seed, so reports are bit-identical at any thread count.
#pragma once

#include <array>
#include <atomic>
#include <optional>
#include <string>
#include <thread>

#include "pipeline.hpp"

namespace modesel {

struct SimConfig {
  std::uint64_t seed = 42;
  int n_buildings = 8;
  std::pair<double, double> building_height_range{20.0, 55.0};  // meters
  std::pair<double, double> street_width_range{18.0, 26.0};     // meters
  double aoi_length = 120.0;  // meters of street covered by the AOI
  int n_satellites = 8;
  std::pair<double, double> elevation_range_deg{15.0, 75.0};
  double clock_bias_m = 120.0;
  double noise_sigma_m = 1.0;
  double visibility_mislabel_rate = 0.0;

  void validate() const {
    const auto range_ok = [](const std::pair<double, double>& r) {
      return std::isfinite(r.first) && std::isfinite(r.second) &&
             r.first < r.second;
    };
    if (!range_ok(building_height_range) || building_height_range.first <= 0)
      throw std::invalid_argument("sim config: bad building_height_range");
    if (!range_ok(street_width_range) || street_width_range.first <= 4.0)
      throw std::invalid_argument("sim config: bad street_width_range");
    if (!range_ok(elevation_range_deg) || elevation_range_deg.first <= 0 ||
        elevation_range_deg.second >= 90.0)
      throw std::invalid_argument("sim config: bad elevation_range_deg");
    if (!(aoi_length > 0) || !std::isfinite(aoi_length))
      throw std::invalid_argument("sim config: aoi_length must be > 0");
    if (n_buildings < 0)
      throw std::invalid_argument("sim config: n_buildings must be >= 0");
    if (n_satellites < 1)
      throw std::invalid_argument("sim config: n_satellites must be >= 1");
    if (!(noise_sigma_m >= 0) || !std::isfinite(noise_sigma_m))
      throw std::invalid_argument("sim config: noise_sigma_m must be >= 0");
    if (!(visibility_mislabel_rate >= 0) || visibility_mislabel_rate >= 1.0)
      throw std::invalid_argument(
          "sim config: visibility_mislabel_rate must be in [0, 1)");
    if (!std::isfinite(clock_bias_m))
      throw std::invalid_argument("sim config: clock_bias_m must be finite");
  }
};

enum class SatTruthKind { Direct, Reflected, NoPath };

struct SatTruth {
  int sat_id = 0;
  SatTruthKind kind = SatTruthKind::Direct;
  int face_id = -1;          // reflecting face for Reflected
  double path_length = 0.0;  // meters, Reflected only
};

struct LabeledEpoch {
  Epoch epoch;                 // surviving observations, truth attached
  VisibilityVector visibility; // observed labels (mislabels applied)
  int truth_mode_id = -1;      // mode containing truth, -1 when none
  std::vector<SatTruth> sat_truth;  // every generated satellite, dropped ones too
};

// Two building rows flanking a street along +y. Each row tiles the street
// length into equal slots and fills 50-90% of each, which keeps footprints
// disjoint by construction; a slot too short for a >= 3 m building aborts
// the attempt.
inline Scene generate_scene(const SimConfig& cfg, RandomStream rng) {
  cfg.validate();
  const auto rect = [](double x0, double y0, double x1, double y1) {
    return Polygon2{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
  };
  for (int attempt = 0; attempt < 20; ++attempt) {
    const double w =
        rng.uniform(cfg.street_width_range.first, cfg.street_width_range.second);
    std::vector<Building> bs;
    bool ok = true;
    int id = 0;
    const auto row = [&](int count, bool west) {
      if (count == 0) return;
      const double slot = cfg.aoi_length / double(count);
      for (int i = 0; i < count; ++i) {
        const double frac = rng.uniform(0.5, 0.9);
        const double off = rng.uniform01();
        const double depth = rng.uniform(8.0, 15.0);
        const double h = rng.uniform(cfg.building_height_range.first,
                                     cfg.building_height_range.second);
        const double len = frac * slot;
        if (len < 3.0) {
          ok = false;
          return;
        }
        const double y0 = double(i) * slot + off * (slot - len);
        const double x0 = west ? -w / 2.0 - depth : w / 2.0;
        const double x1 = west ? -w / 2.0 : w / 2.0 + depth;
        bs.push_back(Building{id++, rect(x0, y0, x1, y0 + len), 0.0, h});
      }
    };
    row((cfg.n_buildings + 1) / 2, true);
    if (ok) row(cfg.n_buildings / 2, false);
    if (!ok) continue;
    return Scene(std::move(bs), 0.0, 1.5,
                 Region2{rect(-w / 2.0 + 1.0, 0.0, w / 2.0 - 1.0, cfg.aoi_length)});
  }
  throw std::runtime_error("scene generation failed");
}

// Forward model at a known truth position. LOS satellites get the direct
// range; NLOS ones get their shortest single-reflection path, or are
// dropped (untracked) when no such path exists. Pseudoranges then add
// clock bias and noise, and the observed visibility may flip per satellite
// with the configured mislabel rate.
inline LabeledEpoch synthesize_epoch(const Scene& scene, const Vec2& truth_pos,
                                     const SimConfig& cfg, RandomStream& rng,
                                     double min_mode_area = 1.0) {
  cfg.validate();
  if (!scene.aoi().contains(truth_pos))
    throw std::invalid_argument("synthesize_epoch: truth_pos outside aoi");
  const Vec3 truth3{truth_pos.x, truth_pos.y, scene.receiver_plane_z()};

  struct Geo {
    int id;
    Vec3 pos;
  };
  std::vector<Geo> sats;
  const int n = cfg.n_satellites;
  for (int i = 0; i < n; ++i) {
    const double az = (double(i) + rng.uniform01()) * (2.0 * M_PI / double(n));
    const double el = rng.uniform(cfg.elevation_range_deg.first,
                                  cfg.elevation_range_deg.second) *
                      M_PI / 180.0;
    const double range = rng.uniform(1.9e7, 2.6e7);
    const Vec3 u{std::sin(az) * std::cos(el), std::cos(az) * std::cos(el),
                 std::sin(el)};
    sats.push_back({i + 1, truth3 + u * range});
  }

  std::vector<SatelliteObservation> obs;
  VisibilityVector vis;
  std::vector<SatTruth> truths;
  for (const auto& s : sats) {
    if (classify_los(scene, truth_pos, s.pos) == Visibility::LOS) {
      const double rho = (s.pos - truth3).norm() + cfg.clock_bias_m +
                         cfg.noise_sigma_m * rng.gaussian();
      obs.push_back({s.id, s.pos, rho});
      vis[s.id] = Visibility::LOS;
      truths.push_back({s.id, SatTruthKind::Direct, -1, 0.0});
      continue;
    }
    const auto paths = find_paths(scene, truth3, {s.id, s.pos, 1.0});
    if (paths.empty()) {
      truths.push_back({s.id, SatTruthKind::NoPath, -1, 0.0});
      continue;
    }
    const PropagationPath* best = &paths.front();
    for (const auto& p : paths)
      if (p.length < best->length ||
          (p.length == best->length && p.face_id < best->face_id))
        best = &p;
    const double rho =
        best->length + cfg.clock_bias_m + cfg.noise_sigma_m * rng.gaussian();
    obs.push_back({s.id, s.pos, rho});
    vis[s.id] = Visibility::NLOS;
    truths.push_back({s.id, SatTruthKind::Reflected, best->face_id, best->length});
  }
  if (obs.size() < 4) throw std::runtime_error("insufficient constellation");

  for (auto& [id, v] : vis)
    if (rng.uniform01() < cfg.visibility_mislabel_rate)
      v = (v == Visibility::LOS) ? Visibility::NLOS : Visibility::LOS;

  int truth_mode = -1;
  try {
    std::map<int, Vec3> pos_map;
    for (const auto& o : obs) pos_map[o.sat_id] = o.position;
    const auto ms = modes_from_visibility(scene, vis, pos_map, min_mode_area);
    truth_mode = ms.mode_containing(truth_pos);
  } catch (const std::exception&) {
    truth_mode = -1;  // mislabels can make the vector infeasible
  }
  return LabeledEpoch{Epoch(std::move(obs), TruthState{truth3, cfg.clock_bias_m}),
                      std::move(vis), truth_mode, std::move(truths)};
}

// Uniform truth placement inside the AOI by rejection from its bbox.
inline LabeledEpoch draw_labeled_epoch(const Scene& scene, const SimConfig& cfg,
                                       RandomStream& rng,
                                       double min_mode_area = 1.0) {
  const auto bb = scene.aoi().bbox();
  for (int i = 0; i < 256; ++i) {
    const Vec2 p{rng.uniform(bb[0].x, bb[1].x), rng.uniform(bb[0].y, bb[1].y)};
    if (!scene.aoi().contains(p)) continue;
    return synthesize_epoch(scene, p, cfg, rng, min_mode_area);
  }
  throw std::runtime_error("truth placement failed");
}

struct EpochRecord {
  int epoch_idx = 0;
  int truth_mode = -1;
  int n_modes = 0;
  int n_dropped = 0;  // NLOS satellites without a recoverable path
  int baseline_choice = -1;
  int enhanced_choice = -1;
  CaseType case_type = CaseType::Case1;
  double baseline_err_m = 0.0;
  double enhanced_err_m = 0.0;
  double ideal_err_m = 0.0;  // truth mode's own centroid error
};

struct BatchReport {
  SimConfig config;
  int n_epochs = 0;  // requested
  int n_failed = 0;
  std::vector<EpochRecord> records;
  std::vector<std::string> failures;  // "epoch <i>: <reason>"
  double accuracy_baseline = 0.0;
  double accuracy_enhanced = 0.0;
  double rms_ideal = 0.0;
  double rms_baseline = 0.0;
  double rms_enhanced = 0.0;
  std::array<int, 3> case_counts{0, 0, 0};  // enhanced cases 1..3
};

// Positioning error convention: the receiver position estimate is the
// chosen mode's centroid, so per-epoch errors are centroid-to-truth
// distances ("ideal" always picks the truth mode).
//
// epochs_out, when set, receives the generated epoch per index (nullopt
// where synthesis or selection failed) so callers can persist them.
inline BatchReport run_batch(const SimConfig& cfg, int n_epochs,
                             const PipelineConfig& pcfg = {}, int n_threads = 1,
                             std::vector<std::optional<LabeledEpoch>>* epochs_out =
                                 nullptr) {
  cfg.validate();
  if (n_epochs < 1)
    throw std::invalid_argument("run_batch: n_epochs must be >= 1");
  if (n_threads < 1)
    throw std::invalid_argument("run_batch: n_threads must be >= 1");
  const RandomStream root(cfg.seed);
  const Scene scene = generate_scene(cfg, root.substream(0));

  struct Slot {
    bool failed = false;
    std::string error;
    EpochRecord rec;
    std::optional<LabeledEpoch> labeled;
  };
  auto slots = std::vector<Slot>(std::size_t(n_epochs));
  std::atomic<int> next{0};
  const auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n_epochs) return;
      Slot& slot = slots[std::size_t(i)];
      try {
        const RandomStream es = root.substream(1 + std::uint64_t(i));
        RandomStream synth = es.substream(0);
        const LabeledEpoch le =
            draw_labeled_epoch(scene, cfg, synth, pcfg.min_mode_area);
        if (le.truth_mode_id < 0)
          throw std::runtime_error("truth not contained in any mode");
        const EpochOutcome oc = run_epoch(scene, le.epoch, le.visibility, pcfg, es);
        const Vec2 truth = le.epoch.truth()->position.xy();
        const auto err = [&](int mode_id) {
          return (oc.mode_set.modes[std::size_t(mode_id)].centroid - truth).norm();
        };
        int dropped = 0;
        for (const auto& st : le.sat_truth)
          if (st.kind == SatTruthKind::NoPath) ++dropped;
        slot.rec = EpochRecord{i,
                               le.truth_mode_id,
                               int(oc.mode_set.modes.size()),
                               dropped,
                               oc.baseline.chosen_mode_id,
                               oc.enhanced.chosen_mode_id,
                               oc.enhanced.case_type,
                               err(oc.baseline.chosen_mode_id),
                               err(oc.enhanced.chosen_mode_id),
                               err(le.truth_mode_id)};
        if (epochs_out) slot.labeled = le;
      } catch (const std::exception& e) {
        slot.failed = true;
        slot.error = e.what();
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  BatchReport rep;
  rep.config = cfg;
  rep.n_epochs = n_epochs;
  if (epochs_out) {
    epochs_out->clear();
    for (auto& slot : slots) epochs_out->push_back(std::move(slot.labeled));
  }
  int correct_b = 0, correct_e = 0;
  double se_i = 0.0, se_b = 0.0, se_e = 0.0;
  for (int i = 0; i < n_epochs; ++i) {
    const Slot& slot = slots[std::size_t(i)];
    if (slot.failed) {
      ++rep.n_failed;
      rep.failures.push_back("epoch " + std::to_string(i) + ": " + slot.error);
      continue;
    }
    const EpochRecord& r = slot.rec;
    rep.records.push_back(r);
    if (r.baseline_choice == r.truth_mode) ++correct_b;
    if (r.enhanced_choice == r.truth_mode) ++correct_e;
    se_i += r.ideal_err_m * r.ideal_err_m;
    se_b += r.baseline_err_m * r.baseline_err_m;
    se_e += r.enhanced_err_m * r.enhanced_err_m;
    switch (r.case_type) {
      case CaseType::Case1: ++rep.case_counts[0]; break;
      case CaseType::Case2: ++rep.case_counts[1]; break;
      case CaseType::Case3: ++rep.case_counts[2]; break;
      case CaseType::Baseline: break;  // not produced by select_enhanced
    }
  }
  const int n_ok = int(rep.records.size());
  if (n_ok > 0) {
    rep.accuracy_baseline = double(correct_b) / double(n_ok);
    rep.accuracy_enhanced = double(correct_e) / double(n_ok);
    rep.rms_ideal = std::sqrt(se_i / double(n_ok));
    rep.rms_baseline = std::sqrt(se_b / double(n_ok));
    rep.rms_enhanced = std::sqrt(se_e / double(n_ok));
  }
  return rep;
}

}  // namespace modesel
