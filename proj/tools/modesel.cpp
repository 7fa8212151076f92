// Command-line front end: scenario generation, single-epoch selection runs,
// and evaluation tables. Every invocation drops a manifest next to its
// outputs; all file writes go through temp+rename.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "modesel/io.hpp"

namespace fs = std::filesystem;
using namespace modesel;
using jsonio::json;

namespace {

constexpr const char* kVersion = "modesel 0.1.0";

// URM_SEED wins over --seed wins over the config file.
std::uint64_t effective_seed(std::uint64_t fallback) {
  const char* env = std::getenv("URM_SEED");
  if (!env) return fallback;
  const std::string s(env);
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("URM_SEED must be an unsigned integer, got '" +
                             s + "'");
  }
}

std::string hash_and_record(RunManifest& man, const std::string& path) {
  std::string bytes = jsonio::read_file(path);
  man.input_hashes[path] = jsonio::fnv1a64_hex(bytes);
  return bytes;
}

int cmd_simulate(const std::string& config_path,
                 std::optional<std::uint64_t> seed_arg, int n_epochs,
                 const std::string& out_dir, int threads) {
  RunManifest man;
  man.tool_version = kVersion;

  SimConfig cfg;
  if (!config_path.empty()) {
    cfg = jsonio::simconfig_from_json(json::parse(hash_and_record(man, config_path)));
    man.config_path = config_path;
  }
  if (seed_arg) cfg.seed = *seed_arg;
  cfg.seed = effective_seed(cfg.seed);
  man.seed = cfg.seed;
  // Thread count deliberately left out: it cannot change the results.
  man.command = "simulate --epochs " + std::to_string(n_epochs) + " --seed " +
                std::to_string(cfg.seed) +
                (config_path.empty() ? "" : " --config " + config_path) +
                " --out-dir " + out_dir;

  fs::create_directories(fs::path(out_dir) / "epochs");

  std::vector<std::optional<LabeledEpoch>> epochs;
  const BatchReport rep = run_batch(cfg, n_epochs, {}, threads, &epochs);
  const Scene scene = generate_scene(cfg, RandomStream(cfg.seed).substream(0));

  save_scene(out_dir + "/scene.json", scene);
  man.output_paths.push_back("scene.json");
  for (int i = 0; i < n_epochs; ++i) {
    if (!epochs[std::size_t(i)]) continue;
    char name[sizeof "epochs/epoch_0000.json" + 8];
    std::snprintf(name, sizeof name, "epochs/epoch_%04d.json", i);
    jsonio::save_json_file(out_dir + "/" + name,
                           jsonio::labeled_epoch_to_json(*epochs[std::size_t(i)]));
    man.output_paths.push_back(name);
  }
  jsonio::save_json_file(out_dir + "/batch.json", jsonio::batch_to_json(rep));
  man.output_paths.push_back("batch.json");
  jsonio::save_text_file(out_dir + "/batch.csv", jsonio::batch_to_csv(rep));
  man.output_paths.push_back("batch.csv");
  save_manifest(out_dir + "/manifest.json", man);

  for (const auto& f : rep.failures) std::cerr << "warning: " << f << "\n";
  std::cout << out_dir << ": " << rep.records.size() << "/" << n_epochs
            << " epochs, accuracy " << jsonio::num(rep.accuracy_baseline)
            << " (spc) / " << jsonio::num(rep.accuracy_enhanced)
            << " (enhanced)\n";
  return rep.n_failed == 0 ? 0 : 1;
}

int cmd_select(const std::string& scene_path, const std::string& epoch_path,
               const std::string& modes_path, const std::string& method,
               std::size_t k, std::uint64_t seed, const std::string& out_path) {
  seed = effective_seed(seed);
  RunManifest man;
  man.tool_version = kVersion;
  man.seed = seed;
  man.command = "select --scene " + scene_path + " --epoch " + epoch_path +
                (modes_path.empty() ? "" : " --modes " + modes_path) +
                " --method " + method + " --k " + std::to_string(k) +
                " --seed " + std::to_string(seed) + " --out " + out_path;

  const Scene scene =
      jsonio::scene_from_json(json::parse(hash_and_record(man, scene_path)));
  const json epoch_json = json::parse(hash_and_record(man, epoch_path));
  const Epoch epoch = jsonio::epoch_from_json(epoch_json);

  std::map<int, Vec3> sats;
  for (const auto& o : epoch.observations()) sats[o.sat_id] = o.position;

  ModeSet modes;
  if (!modes_path.empty()) {
    const json mj = json::parse(hash_and_record(man, modes_path));
    if (mj.contains("sat_ids")) {
      auto want = mj.at("sat_ids").get<std::vector<int>>();
      std::sort(want.begin(), want.end());
      std::vector<int> have;
      for (const auto& o : epoch.observations()) have.push_back(o.sat_id);
      if (want != have) {
        json err;
        err["error"] = "sat_id mismatch between epoch and modes metadata";
        err["epoch_sat_ids"] = have;
        err["modes_sat_ids"] = want;
        std::cerr << err.dump(2) << "\n";
        return 2;
      }
    }
    modes = jsonio::modeset_from_json(mj);
  } else {
    if (!epoch_json.contains("visibility"))
      throw std::runtime_error(
          "epoch file carries no visibility labels; pass --modes");
    modes = modes_from_visibility(
        scene, jsonio::visibility_from_json(epoch_json.at("visibility")), sats);
  }

  // Same substream layout as the batch pipeline: baseline on substream 1,
  // consistency row i on substream 2+i.
  const RandomStream rng(seed);
  json results = json::array();
  std::string chosen;
  if (method == "spc" || method == "both") {
    const SelectionResult r = select_baseline(epoch, modes, scene.aoi_centroid(),
                                              k, rng.substream(1));
    results.push_back(jsonio::selection_to_json(r));
    chosen += " spc=" + std::to_string(r.chosen_mode_id);
  }
  if (method == "enhanced" || method == "both") {
    const ConsistencyMatrix matrix =
        consistency_matrix(scene, epoch, modes, k, rng);
    const SelectionResult r = select_enhanced(matrix);
    json jr = jsonio::selection_to_json(r);
    jr["matrix"] = jsonio::matrix_to_json(matrix);
    results.push_back(std::move(jr));
    chosen += " enhanced=" + std::to_string(r.chosen_mode_id);
  }

  json out;
  out["seed"] = seed;
  out["k"] = k;
  out["n_modes"] = modes.modes.size();
  out["results"] = std::move(results);
  jsonio::save_json_file(out_path, out);
  man.output_paths.push_back(out_path);
  save_manifest(out_path + ".manifest.json", man);

  std::cout << out_path << ": " << modes.modes.size() << " modes,"
            << chosen << "\n";
  return 0;
}

int cmd_eval(const std::string& run_dir, const std::string& out_path,
             const std::string& plots_dir) {
  std::vector<std::string> missing;
  for (const char* f : {"scene.json", "batch.json", "manifest.json"})
    if (!fs::exists(fs::path(run_dir) / f)) missing.push_back(f);
  if (!missing.empty()) {
    std::string msg = "run dir '" + run_dir + "' is missing:";
    for (const auto& f : missing) msg += " " + f;
    throw std::runtime_error(msg);
  }

  RunManifest man;
  man.tool_version = kVersion;
  man.command = "eval --run-dir " + run_dir + " --out " + out_path +
                (plots_dir.empty() ? "" : " --plots-dir " + plots_dir);
  const BatchReport rep = jsonio::batch_from_json(
      json::parse(hash_and_record(man, run_dir + "/batch.json")));
  man.seed = rep.config.seed;

  // Rows are metrics, columns the three selectors: ideal (truth mode by
  // construction), existing SPC, proposed enhanced SPC. Case counts only
  // apply to the proposed selector's consistency machinery.
  const bool any = !rep.records.empty();
  std::string report = "metric,ideal,existing,proposed\n";
  report += std::string("accuracy,") + (any ? "1" : "0") + ',' +
            jsonio::num(rep.accuracy_baseline) + ',' +
            jsonio::num(rep.accuracy_enhanced) + '\n';
  report += "rms_m," + jsonio::num(rep.rms_ideal) + ',' +
            jsonio::num(rep.rms_baseline) + ',' +
            jsonio::num(rep.rms_enhanced) + '\n';
  for (int c = 0; c < 3; ++c)
    report += "case_" + std::to_string(c + 1) + "_count,,," +
              std::to_string(rep.case_counts[std::size_t(c)]) + '\n';
  report += "epochs_used,,," + std::to_string(rep.records.size()) + '\n';
  report += "epochs_failed,,," + std::to_string(rep.n_failed) + '\n';
  jsonio::save_text_file(out_path, report);
  man.output_paths.push_back(out_path);

  if (!plots_dir.empty()) {
    fs::create_directories(plots_dir);
    std::string acc = "method,accuracy\n";
    acc += "existing," + jsonio::num(rep.accuracy_baseline) + '\n';
    acc += "proposed," + jsonio::num(rep.accuracy_enhanced) + '\n';
    jsonio::save_text_file(plots_dir + "/accuracy.csv", acc);

    std::string errs = "epoch_idx,ideal_err_m,existing_err_m,proposed_err_m\n";
    for (const auto& r : rep.records)
      errs += std::to_string(r.epoch_idx) + ',' + jsonio::num(r.ideal_err_m) +
              ',' + jsonio::num(r.baseline_err_m) + ',' +
              jsonio::num(r.enhanced_err_m) + '\n';
    jsonio::save_text_file(plots_dir + "/errors.csv", errs);

    std::string cases = "case,count\n";
    for (int c = 0; c < 3; ++c)
      cases += std::to_string(c + 1) + ',' +
               std::to_string(rep.case_counts[std::size_t(c)]) + '\n';
    jsonio::save_text_file(plots_dir + "/cases.csv", cases);

    man.output_paths.push_back(plots_dir + "/accuracy.csv");
    man.output_paths.push_back(plots_dir + "/errors.csv");
    man.output_paths.push_back(plots_dir + "/cases.csv");
    save_manifest(plots_dir + "/manifest.json", man);
  }
  save_manifest(out_path + ".manifest.json", man);

  std::cout << out_path << ": accuracy "
            << jsonio::num(rep.accuracy_baseline) << " (existing) / "
            << jsonio::num(rep.accuracy_enhanced) << " (proposed), rms "
            << jsonio::num(rep.rms_enhanced) << " m (proposed)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-based mode selection for zonotope shadow matching"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* sim = app.add_subcommand(
      "simulate", "Generate a street-canyon scene and run a Monte Carlo batch");
  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  int sim_epochs = 0, sim_threads = 1;
  sim->add_option("--config", sim_config, "Simulator config JSON file");
  auto* sim_seed_opt =
      sim->add_option("--seed", sim_seed, "Root seed (overrides the config)");
  sim->add_option("--epochs", sim_epochs, "Number of epochs to draw")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--out-dir", sim_out, "Output directory")->required();
  sim->add_option("--threads", sim_threads, "Worker threads (same results)")
      ->check(CLI::PositiveNumber);

  auto* sel = app.add_subcommand(
      "select", "Run mode selection for one epoch against a scene");
  std::string sel_scene, sel_epoch, sel_modes, sel_out, sel_method = "both";
  std::size_t sel_k = 1000;
  std::uint64_t sel_seed = 0;
  sel->add_option("--scene", sel_scene, "Scene JSON file")->required();
  sel->add_option("--epoch", sel_epoch, "Epoch JSON file")->required();
  sel->add_option("--modes", sel_modes,
                  "Mode-set JSON file (skips the shadow-matching stage)");
  sel->add_option("--method", sel_method, "Selection method")
      ->check(CLI::IsMember({"spc", "enhanced", "both"}));
  sel->add_option("--k", sel_k, "Posterior sample count")
      ->check(CLI::PositiveNumber);
  sel->add_option("--seed", sel_seed, "Selection seed");
  sel->add_option("--out", sel_out, "Result JSON path")->required();

  auto* ev = app.add_subcommand(
      "eval", "Summarize a finished batch into report and plot tables");
  std::string ev_run, ev_out, ev_plots;
  ev->add_option("--run-dir", ev_run, "Directory written by simulate")
      ->required();
  ev->add_option("--out", ev_out, "Report CSV path")->required();
  ev->add_option("--plots-dir", ev_plots, "Directory for plot-ready CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(sim_config,
                          sim_seed_opt->count()
                              ? std::optional<std::uint64_t>(sim_seed)
                              : std::nullopt,
                          sim_epochs, sim_out, sim_threads);
    if (sel->parsed())
      return cmd_select(sel_scene, sel_epoch, sel_modes, sel_method, sel_k,
                        sel_seed, sel_out);
    if (ev->parsed()) return cmd_eval(ev_run, ev_out, ev_plots);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
