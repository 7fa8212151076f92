#pragma once

// Serialization for simulator artifacts and selection results, plus the run
// manifest and CSV emitters behind the command-line tool. Everything here is
// deterministic: identical inputs serialize to identical bytes.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sim.hpp"

namespace modesel {

namespace jsonio {

// FNV-1a, for manifests that pin input files to exact bytes.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string hash_file(const std::string& path) {
  return fnv1a64_hex(read_file(path));
}

inline void save_text_file(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out << text;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

// Shortest round-trip decimal form, same algorithm the JSON dumps use, so
// CSV and JSON agree on every number.
inline std::string num(double x) { return json(x).dump(); }

inline json simconfig_to_json(const SimConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["n_buildings"] = c.n_buildings;
  j["building_height_range"] = {c.building_height_range.first,
                                c.building_height_range.second};
  j["street_width_range"] = {c.street_width_range.first,
                             c.street_width_range.second};
  j["aoi_length"] = c.aoi_length;
  j["n_satellites"] = c.n_satellites;
  j["elevation_range_deg"] = {c.elevation_range_deg.first,
                              c.elevation_range_deg.second};
  j["clock_bias_m"] = c.clock_bias_m;
  j["noise_sigma_m"] = c.noise_sigma_m;
  j["visibility_mislabel_rate"] = c.visibility_mislabel_rate;
  return j;
}

// Accepts partial configs: absent fields keep their defaults, unknown
// fields are typos and rejected.
inline SimConfig simconfig_from_json(const json& j) {
  SimConfig c;
  const auto pair_of = [](const json& a, const char* what) {
    if (!a.is_array() || a.size() != 2)
      throw std::runtime_error(std::string("sim config: ") + what +
                               " must be a [lo, hi] pair");
    return std::pair<double, double>{a[0].get<double>(), a[1].get<double>()};
  };
  for (const auto& [key, val] : j.items()) {
    if (key == "seed") c.seed = val.get<std::uint64_t>();
    else if (key == "n_buildings") c.n_buildings = val.get<int>();
    else if (key == "building_height_range")
      c.building_height_range = pair_of(val, "building_height_range");
    else if (key == "street_width_range")
      c.street_width_range = pair_of(val, "street_width_range");
    else if (key == "aoi_length") c.aoi_length = val.get<double>();
    else if (key == "n_satellites") c.n_satellites = val.get<int>();
    else if (key == "elevation_range_deg")
      c.elevation_range_deg = pair_of(val, "elevation_range_deg");
    else if (key == "clock_bias_m") c.clock_bias_m = val.get<double>();
    else if (key == "noise_sigma_m") c.noise_sigma_m = val.get<double>();
    else if (key == "visibility_mislabel_rate")
      c.visibility_mislabel_rate = val.get<double>();
    else
      throw std::runtime_error("sim config: unknown field '" + key + "'");
  }
  c.validate();
  return c;
}

inline const char* to_string(Visibility v) {
  return v == Visibility::LOS ? "los" : "nlos";
}

inline Visibility visibility_from_string(const std::string& s) {
  if (s == "los") return Visibility::LOS;
  if (s == "nlos") return Visibility::NLOS;
  throw std::runtime_error("visibility: expected 'los' or 'nlos', got '" + s +
                           "'");
}

inline json visibility_to_json(const VisibilityVector& vis) {
  json j = json::object();
  for (const auto& [id, v] : vis) j[std::to_string(id)] = to_string(v);
  return j;
}

inline VisibilityVector visibility_from_json(const json& j) {
  VisibilityVector vis;
  for (const auto& [key, val] : j.items())
    vis[std::stoi(key)] = visibility_from_string(val.get<std::string>());
  return vis;
}

inline const char* to_string(SatTruthKind k) {
  switch (k) {
    case SatTruthKind::Direct: return "direct";
    case SatTruthKind::Reflected: return "reflected";
    default: return "untracked";
  }
}

inline SatTruthKind sat_truth_kind_from_string(const std::string& s) {
  if (s == "direct") return SatTruthKind::Direct;
  if (s == "reflected") return SatTruthKind::Reflected;
  if (s == "untracked") return SatTruthKind::NoPath;
  throw std::runtime_error("sat truth: unknown kind '" + s + "'");
}

// Superset of the plain epoch schema; epoch_from_json ignores the extra
// keys, so labeled files load fine wherever a bare epoch is expected.
inline json labeled_epoch_to_json(const LabeledEpoch& le) {
  json j = epoch_to_json(le.epoch);
  j["visibility"] = visibility_to_json(le.visibility);
  j["truth_mode_id"] = le.truth_mode_id;
  json st = json::array();
  for (const auto& t : le.sat_truth) {
    json e;
    e["sat_id"] = t.sat_id;
    e["kind"] = to_string(t.kind);
    if (t.kind == SatTruthKind::Reflected) {
      e["face_id"] = t.face_id;
      e["path_length"] = t.path_length;
    }
    st.push_back(std::move(e));
  }
  j["sat_truth"] = std::move(st);
  return j;
}

inline LabeledEpoch labeled_epoch_from_json(const json& j) {
  if (!j.contains("visibility"))
    throw std::runtime_error("labeled epoch: missing field 'visibility'");
  LabeledEpoch le{epoch_from_json(j), visibility_from_json(j.at("visibility")),
                  j.value("truth_mode_id", -1), {}};
  for (const auto& e : j.value("sat_truth", json::array())) {
    SatTruth t;
    t.sat_id = e.at("sat_id").get<int>();
    t.kind = sat_truth_kind_from_string(e.at("kind").get<std::string>());
    t.face_id = e.value("face_id", -1);
    t.path_length = e.value("path_length", 0.0);
    le.sat_truth.push_back(t);
  }
  return le;
}

inline json selection_to_json(const SelectionResult& r) {
  json j;
  j["method"] = modesel::to_string(r.method);
  j["chosen_mode_id"] = r.chosen_mode_id;
  j["case"] = modesel::to_string(r.case_type);
  j["row_probs"] = r.row_probs;
  return j;
}

inline json matrix_to_json(const ConsistencyMatrix& m) { return json(m.probs); }

inline CaseType case_from_string(const std::string& s) {
  if (s == "1") return CaseType::Case1;
  if (s == "2") return CaseType::Case2;
  if (s == "3") return CaseType::Case3;
  if (s == "baseline") return CaseType::Baseline;
  throw std::runtime_error("unknown case '" + s + "'");
}

inline json epoch_record_to_json(const EpochRecord& r) {
  json j;
  j["epoch_idx"] = r.epoch_idx;
  j["truth_mode"] = r.truth_mode;
  j["n_modes"] = r.n_modes;
  j["n_dropped"] = r.n_dropped;
  j["baseline_choice"] = r.baseline_choice;
  j["enhanced_choice"] = r.enhanced_choice;
  j["case"] = modesel::to_string(r.case_type);
  j["baseline_err_m"] = r.baseline_err_m;
  j["enhanced_err_m"] = r.enhanced_err_m;
  j["ideal_err_m"] = r.ideal_err_m;
  return j;
}

inline EpochRecord epoch_record_from_json(const json& j) {
  EpochRecord r;
  r.epoch_idx = j.at("epoch_idx").get<int>();
  r.truth_mode = j.at("truth_mode").get<int>();
  r.n_modes = j.at("n_modes").get<int>();
  r.n_dropped = j.at("n_dropped").get<int>();
  r.baseline_choice = j.at("baseline_choice").get<int>();
  r.enhanced_choice = j.at("enhanced_choice").get<int>();
  r.case_type = case_from_string(j.at("case").get<std::string>());
  r.baseline_err_m = j.at("baseline_err_m").get<double>();
  r.enhanced_err_m = j.at("enhanced_err_m").get<double>();
  r.ideal_err_m = j.at("ideal_err_m").get<double>();
  return r;
}

inline json batch_to_json(const BatchReport& rep) {
  json j;
  j["config"] = simconfig_to_json(rep.config);
  j["n_epochs"] = rep.n_epochs;
  j["n_failed"] = rep.n_failed;
  json recs = json::array();
  for (const auto& r : rep.records) recs.push_back(epoch_record_to_json(r));
  j["records"] = std::move(recs);
  j["failures"] = rep.failures;
  j["accuracy"] = {{"baseline", rep.accuracy_baseline},
                   {"enhanced", rep.accuracy_enhanced}};
  j["rms_m"] = {{"ideal", rep.rms_ideal},
                {"baseline", rep.rms_baseline},
                {"enhanced", rep.rms_enhanced}};
  j["case_counts"] = rep.case_counts;
  return j;
}

inline BatchReport batch_from_json(const json& j) {
  BatchReport rep;
  rep.config = simconfig_from_json(j.at("config"));
  rep.n_epochs = j.at("n_epochs").get<int>();
  rep.n_failed = j.at("n_failed").get<int>();
  for (const auto& r : j.at("records"))
    rep.records.push_back(epoch_record_from_json(r));
  rep.failures = j.at("failures").get<std::vector<std::string>>();
  rep.accuracy_baseline = j.at("accuracy").at("baseline").get<double>();
  rep.accuracy_enhanced = j.at("accuracy").at("enhanced").get<double>();
  rep.rms_ideal = j.at("rms_m").at("ideal").get<double>();
  rep.rms_baseline = j.at("rms_m").at("baseline").get<double>();
  rep.rms_enhanced = j.at("rms_m").at("enhanced").get<double>();
  const auto& cc = j.at("case_counts");
  for (std::size_t i = 0; i < 3; ++i) rep.case_counts[i] = cc.at(i).get<int>();
  return rep;
}

inline std::string batch_to_csv(const BatchReport& rep) {
  std::string s =
      "epoch_idx,truth_mode,M,baseline_choice,enhanced_choice,case,"
      "baseline_err_m,enhanced_err_m,ideal_err_m\n";
  for (const auto& r : rep.records) {
    s += std::to_string(r.epoch_idx) + ',' + std::to_string(r.truth_mode) +
         ',' + std::to_string(r.n_modes) + ',' +
         std::to_string(r.baseline_choice) + ',' +
         std::to_string(r.enhanced_choice) + ',' +
         modesel::to_string(r.case_type) + ',' + num(r.baseline_err_m) + ',' +
         num(r.enhanced_err_m) + ',' + num(r.ideal_err_m) + '\n';
  }
  return s;
}

}  // namespace jsonio

// Enough to reproduce a run exactly: the command line's intent, the seed
// actually used, and content hashes of every input consumed.
struct RunManifest {
  std::string command;
  std::string config_path;  // empty when the run used built-in defaults
  std::uint64_t seed = 0;
  std::string tool_version;
  std::map<std::string, std::string> input_hashes;  // path -> fnv1a64 hex
  std::vector<std::string> output_paths;
};

namespace jsonio {

inline json manifest_to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config_path"] = m.config_path;
  j["seed"] = m.seed;
  j["tool_version"] = m.tool_version;
  j["input_hashes"] = m.input_hashes;
  j["output_paths"] = m.output_paths;
  return j;
}

inline RunManifest manifest_from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config_path = j.at("config_path").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.tool_version = j.at("tool_version").get<std::string>();
  m.input_hashes =
      j.at("input_hashes").get<std::map<std::string, std::string>>();
  m.output_paths = j.at("output_paths").get<std::vector<std::string>>();
  return m;
}

}  // namespace jsonio

inline void save_manifest(const std::string& path, const RunManifest& m) {
  jsonio::save_json_file(path, jsonio::manifest_to_json(m));
}

inline RunManifest load_manifest(const std::string& path) {
  return jsonio::manifest_from_json(jsonio::load_json_file(path));
}

}  // namespace modesel
