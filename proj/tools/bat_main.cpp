// Command-line front end: ingest, synth, train, eval, predict, heatmap,
// ablate. Every failure surfaces as a single "error: ..." line on stderr
// with a nonzero exit code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bat/checkpoint.hpp"
#include "bat/config.hpp"
#include "bat/data.hpp"
#include "bat/eval.hpp"
#include "bat/graph.hpp"
#include "bat/model.hpp"
#include "bat/rng.hpp"
#include "bat/train.hpp"

namespace {

using nlohmann::json;

bool verbose() {
  const char* env = std::getenv("BAT_VERBOSE");
  return env != nullptr && std::string(env) != "0";
}

void info(const std::string& line) {
  if (verbose()) std::cerr << line << "\n";
}

// Defaults, then the optional config file, then --set overrides, in order.
bat::harness::RunConfig resolve_config(const std::string& config_path,
                                       const std::vector<std::string>& sets) {
  bat::harness::RunConfig config;
  if (!config_path.empty()) bat::harness::load_config_file(config, config_path);
  for (const auto& entry : sets) {
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + entry + "'");
    bat::harness::apply_config_entry(config, entry.substr(0, eq),
                                     entry.substr(eq + 1));
  }
  return config;
}

bat::data::SynthKind parse_synth_kind(const std::string& name) {
  if (name == "constant_velocity") return bat::data::SynthKind::constant_velocity;
  if (name == "lane_change") return bat::data::SynthKind::lane_change;
  if (name == "roundabout_arc") return bat::data::SynthKind::roundabout_arc;
  throw std::invalid_argument("unknown synth_kind '" + name + "'");
}

bat::data::SplitMode parse_split_mode(const std::string& name) {
  if (name == "overall") return bat::data::SplitMode::overall;
  if (name == "maneuver_based") return bat::data::SplitMode::maneuver_based;
  throw std::invalid_argument("unknown split_mode '" + name + "'");
}

// Scene source shared by train/eval/predict/heatmap/ablate: a cache file when
// config.dataset is set, otherwise the seeded synthetic generator.
std::vector<bat::Scene> resolve_scenes(const bat::harness::RunConfig& config) {
  if (!config.dataset.empty()) {
    auto scenes = bat::data::load_scene_cache(config.dataset);
    info("loaded " + std::to_string(scenes.size()) + " scenes from " +
         config.dataset);
    return scenes;
  }
  std::vector<bat::Scene> scenes;
  if (config.synth_kind == "corpus") {
    scenes = bat::data::synth_corpus(config.synth_scenes, config.synth_noise,
                                     config.seed, config.model.t_h,
                                     config.model.t_f, config.model.dt);
  } else {
    bat::data::SynthSpec spec;
    spec.kind = parse_synth_kind(config.synth_kind);
    spec.n_scenes = config.synth_scenes;
    spec.noise_sigma = config.synth_noise;
    spec.t_h = config.model.t_h;
    spec.t_f = config.model.t_f;
    spec.dt = config.model.dt;
    spec.seed = config.seed;
    scenes = bat::data::synth_generate(spec);
  }
  info("generated " + std::to_string(scenes.size()) + " " + config.synth_kind +
       " scenes (seed " + std::to_string(config.seed) + ")");
  return scenes;
}

bat::data::DatasetSplit resolve_split(const bat::harness::RunConfig& config) {
  auto split = bat::data::split_dataset(resolve_scenes(config), config.fractions,
                                        parse_split_mode(config.split_mode),
                                        config.seed);
  if (config.subsample < 1.0)
    split.train = bat::data::subsample(split.train, config.subsample,
                                       bat::mix_seed(config.seed, 0x5AB5A));
  return split;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << v;
  return os.str();
}

void print_rmse_rows(
    const std::vector<std::pair<std::string, bat::harness::EvalResult>>& rows) {
  std::cout << "row          n     model@1s  2s      3s      4s      5s     "
               " cv@1s   2s      3s      4s      5s\n";
  for (const auto& [name, res] : rows) {
    std::ostringstream os;
    os.width(12);
    os << std::left << name;
    os << " " << res.n_scenes;
    for (double v : res.model_rmse) os << "  " << fmt(v);
    for (double v : res.baseline_rmse) os << "  " << fmt(v);
    std::cout << os.str() << "\n";
  }
}

int cmd_ingest(const std::string& input, const std::string& output,
               const std::string& export_csv, const bat::data::ColumnMap& columns,
               const std::string& unit_name, double source_dt,
               double capture_radius, const std::vector<int>& merge_lanes,
               const bat::harness::RunConfig& config) {
  bat::data::Unit unit;
  if (unit_name == "meters") {
    unit = bat::data::Unit::meters;
  } else if (unit_name == "feet") {
    unit = bat::data::Unit::feet;
  } else {
    throw std::invalid_argument("unknown unit '" + unit_name + "'");
  }
  auto table = bat::data::ingest_csv(input, columns, unit, source_dt);
  info("ingested " + std::to_string(table.segments.size()) + " segments");
  if (!export_csv.empty()) {
    bat::data::export_tracks_csv(table, export_csv);
    info("normalized tracks -> " + export_csv);
  }
  bat::data::WindowSpec spec;
  spec.t_h = config.model.t_h;
  spec.t_f = config.model.t_f;
  spec.dt = config.model.dt;
  spec.capture_radius = capture_radius;
  spec.merge_lanes = merge_lanes;
  auto scenes = bat::data::window_scenes(table, spec);
  if (scenes.empty())
    throw std::runtime_error(input + ": no complete windows (need " +
                             std::to_string(spec.t_h + spec.t_f) +
                             " s per vehicle)");
  bat::data::save_scene_cache(scenes, output);
  std::cout << "ingest: " << table.segments.size() << " segments -> "
            << scenes.size() << " scenes -> " << output << "\n";
  return 0;
}

int cmd_synth(const std::string& output, const bat::harness::RunConfig& config) {
  auto scenes = resolve_scenes(config);
  bat::data::save_scene_cache(scenes, output);
  std::cout << "synth: " << scenes.size() << " " << config.synth_kind
            << " scenes -> " << output << "\n";
  return 0;
}

int cmd_train(const std::string& checkpoint, const std::string& log_path,
              const bat::harness::RunConfig& config) {
  auto split = resolve_split(config);
  info("split: " + std::to_string(split.train.size()) + " train, " +
       std::to_string(split.val.size()) + " val, " +
       std::to_string(split.test.size()) + " test");
  bat::model::BatModel model(config.model, config.seed);
  auto result = bat::harness::train_model(model, config, split.train, split.val,
                                          log_path, checkpoint);
  if (result.log.empty()) {
    std::cout << "train: 0 epochs (initial checkpoint only) -> " << checkpoint << "\n";
    return 0;
  }
  const auto& last = result.log.back();
  std::cout << "train: " << result.log.size() << " epochs, final nll "
            << fmt(last.train_nll) << ", final train rmse@t_f "
            << fmt(last.train_rmse) << " -> " << checkpoint << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& output,
             const std::vector<std::string>& sets) {
  auto loaded = bat::harness::load_checkpoint(checkpoint);
  auto config = loaded.config;
  for (const auto& entry : sets) {
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + entry + "'");
    bat::harness::apply_config_entry(config, entry.substr(0, eq),
                                     entry.substr(eq + 1));
  }
  auto split = resolve_split(config);
  std::vector<std::pair<std::string, bat::harness::EvalResult>> rows;
  rows.emplace_back("test", bat::harness::evaluate(*loaded.model, split.test,
                                                config.rmse_mode));
  if (parse_split_mode(config.split_mode) == bat::data::SplitMode::maneuver_based) {
    for (int tag = 0; tag < 4; ++tag) {
      if (split.test_by_tag[tag].empty()) continue;
      rows.emplace_back(bat::to_string(static_cast<bat::SplitTag>(tag)),
                        bat::harness::evaluate(*loaded.model, split.test_by_tag[tag],
                                            config.rmse_mode));
    }
  }
  print_rmse_rows(rows);
  if (!output.empty()) {
    bat::harness::write_rmse_csv(output, rows);
    std::cout << "eval: " << rows.size() << " rows -> " << output << "\n";
  }
  return 0;
}

json prediction_json(const bat::model::MultimodalPrediction& pred,
                     const bat::model::PolarScene& polar, int scene_index) {
  json out;
  out["scene_index"] = scene_index;
  out["origin"] = {{"x", polar.origin.x}, {"y", polar.origin.y}};
  out["rotation"] = polar.rotation;
  json modes = json::array();
  for (int k = 0; k < bat::kManeuverCount; ++k) {
    auto maneuver = bat::maneuver_from_index(k);
    json steps = json::array();
    for (const auto& g : pred.trajectories[k]) {
      steps.push_back({{"mu_rho", g.mu_rho},
                       {"mu_theta", g.mu_theta},
                       {"sigma_rho", g.sigma_rho},
                       {"sigma_theta", g.sigma_theta},
                       {"corr", g.corr}});
    }
    modes.push_back({{"lateral", bat::to_string(maneuver.lateral)},
                     {"longitudinal", bat::to_string(maneuver.longitudinal)},
                     {"probability", pred.maneuver_probs[k]},
                     {"steps", std::move(steps)}});
  }
  out["maneuvers"] = std::move(modes);
  json attention = json::object();
  for (std::size_t i = 0; i < pred.attention_ids.size(); ++i)
    attention[std::to_string(pred.attention_ids[i])] = pred.attention_weights[i];
  out["attention"] = std::move(attention);
  return out;
}

int cmd_predict(const std::string& checkpoint, int scene_index,
                const std::string& output, const std::string& behavior_csv,
                const std::vector<std::string>& sets) {
  auto loaded = bat::harness::load_checkpoint(checkpoint);
  auto config = loaded.config;
  for (const auto& entry : sets) {
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + entry + "'");
    bat::harness::apply_config_entry(config, entry.substr(0, eq),
                                     entry.substr(eq + 1));
  }
  auto scenes = resolve_scenes(config);
  if (scene_index < 0 || scene_index >= static_cast<int>(scenes.size()))
    throw std::out_of_range("scene index " + std::to_string(scene_index) +
                            " outside [0, " + std::to_string(scenes.size()) + ")");
  const auto& scene = scenes[scene_index];
  auto polar = bat::model::preprocess(scene, config.model);
  auto pred = loaded.model->predict(polar);
  json out = prediction_json(pred, polar, scene_index);
  if (output.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    std::ofstream os(output);
    if (!os) throw std::runtime_error(output + ": cannot open for writing");
    os << out.dump(2) << "\n";
    std::cout << "predict: scene " << scene_index << " -> " << output << "\n";
  }
  if (!behavior_csv.empty()) {
    auto series = bat::graph::behavior_features(scene, config.model.r,
                                                config.model.dt);
    std::ofstream os(behavior_csv);
    if (!os) throw std::runtime_error(behavior_csv + ": cannot open for writing");
    bat::graph::export_behavior_csv(series, os);
    std::cout << "behavior: " << series.agent_ids.size() << " agents -> "
              << behavior_csv << "\n";
  }
  return 0;
}

int cmd_heatmap(const std::string& checkpoint, int scene_index, int step,
                const std::string& prefix, double sigmas, int resolution,
                const std::vector<std::string>& sets) {
  auto loaded = bat::harness::load_checkpoint(checkpoint);
  auto config = loaded.config;
  for (const auto& entry : sets) {
    auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + entry + "'");
    bat::harness::apply_config_entry(config, entry.substr(0, eq),
                                     entry.substr(eq + 1));
  }
  auto scenes = resolve_scenes(config);
  if (scene_index < 0 || scene_index >= static_cast<int>(scenes.size()))
    throw std::out_of_range("scene index " + std::to_string(scene_index) +
                            " outside [0, " + std::to_string(scenes.size()) + ")");
  auto pred = loaded.model->predict(scenes[scene_index]);
  int n_steps = static_cast<int>(pred.trajectories[0].size());
  int first = step < 0 ? 0 : step;
  int last = step < 0 ? n_steps - 1 : step;
  if (first < 0 || last >= n_steps)
    throw std::out_of_range("step " + std::to_string(step) + " outside [0, " +
                            std::to_string(n_steps) + ")");
  for (int s = first; s <= last; ++s) {
    auto grid = bat::harness::auto_grid(pred, s, sigmas, resolution);
    auto density = bat::harness::density_grid(pred, s, grid);
    std::string stem = prefix + "_step" + std::to_string(s);
    bat::harness::write_pgm(density, grid, stem + ".pgm");
    bat::harness::write_density_csv(density, grid, stem + ".csv");
    std::cout << "heatmap: step " << s << " mass "
              << fmt(bat::harness::grid_mass(density, grid)) << " ["
              << fmt(grid.x_min) << "," << fmt(grid.x_max) << "]x["
              << fmt(grid.y_min) << "," << fmt(grid.y_max) << "] -> " << stem
              << ".{pgm,csv}\n";
  }
  return 0;
}

// Named model/radius variants for the comparison tables. A..D flip one
// switch each off the shared base config; E is the base itself; rX sweeps
// the graph radius on the full model.
bat::harness::RunConfig variant_config(const bat::harness::RunConfig& base,
                                       const std::string& name) {
  auto config = base;
  if (name == "A") {
    config.model.cartesian_input = true;
  } else if (name == "B") {
    config.model.use_behavior = false;
  } else if (name == "C") {
    config.model.use_interaction = false;
  } else if (name == "D") {
    config.model.use_priority = false;
  } else if (name == "E") {
    // base config unchanged
  } else if (name == "r0") {
    config.model.r = 0.0;
  } else if (name == "r7.62") {
    config.model.r = 7.62;
  } else if (name == "r15.24") {
    config.model.r = 15.24;
  } else {
    throw std::invalid_argument(
        "unknown variant '" + name +
        "' (expected A, B, C, D, E, r0, r7.62, or r15.24)");
  }
  return config;
}

int cmd_ablate(const std::string& output, const std::string& variants_arg,
               const bat::harness::RunConfig& base) {
  std::vector<std::string> names;
  std::stringstream ss(variants_arg);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) names.push_back(token);
  }
  if (names.empty()) throw std::invalid_argument("empty variant list");
  for (const auto& name : names) variant_config(base, name);

  // One shared dataset and split: every variant trains and tests on the
  // same scenes with the same seed, so rows differ only by the variant.
  auto split = resolve_split(base);
  info("split: " + std::to_string(split.train.size()) + " train, " +
       std::to_string(split.val.size()) + " val, " +
       std::to_string(split.test.size()) + " test");
  std::vector<std::pair<std::string, bat::harness::EvalResult>> rows;
  for (const auto& name : names) {
    auto config = variant_config(base, name);
    bat::model::BatModel model(config.model, config.seed);
    bat::harness::train_model(model, config, split.train, split.val, "", "");
    rows.emplace_back(name,
                      bat::harness::evaluate(model, split.test, config.rmse_mode));
    const auto& res = rows.back().second;
    int horizon = std::min(4, std::max(0, static_cast<int>(config.model.t_f) - 1));
    info("variant " + name + ": rmse@" + std::to_string(horizon + 1) + "s " +
         fmt(res.model_rmse[horizon]));
  }
  print_rmse_rows(rows);
  bat::harness::write_rmse_csv(output, rows);
  std::cout << "ablate: " << rows.size() << " variants -> " << output << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavior-aware multimodal trajectory prediction"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key=value config file")
      ->envname("BAT_CONFIG");
  app.add_option("--set", sets, "config override key=value (repeatable)");

  auto* ingest = app.add_subcommand("ingest", "CSV tracks -> scene cache");
  std::string in_input, in_output, in_export, in_unit = "meters";
  bat::data::ColumnMap columns;
  double source_dt = 0.2, capture_radius = 15.24;
  std::vector<int> merge_lanes;
  ingest->add_option("--input", in_input, "raw track CSV")->required();
  ingest->add_option("--output", in_output, "scene cache path")->required();
  ingest->add_option("--export-csv", in_export, "write normalized tracks CSV");
  ingest->add_option("--unit", in_unit, "meters|feet");
  ingest->add_option("--source-dt", source_dt, "raw frame period in seconds");
  ingest->add_option("--capture-radius", capture_radius,
                     "neighbor capture radius in meters");
  ingest->add_option("--merge-lanes", merge_lanes,
                     "lane ids treated as merge ramps");
  ingest->add_option("--col-vehicle", columns.vehicle_id, "vehicle id column");
  ingest->add_option("--col-frame", columns.frame, "frame column");
  ingest->add_option("--col-x", columns.x, "x column");
  ingest->add_option("--col-y", columns.y, "y column");
  ingest->add_option("--col-lane", columns.lane_id,
                     "lane id column (empty disables lanes)");

  auto* synth = app.add_subcommand("synth", "generate synthetic scene cache");
  std::string sy_output;
  synth->add_option("--output", sy_output, "scene cache path")->required();

  auto* train = app.add_subcommand("train", "train a model");
  std::string tr_checkpoint, tr_log;
  train->add_option("--checkpoint", tr_checkpoint, "checkpoint output path")
      ->required();
  train->add_option("--log", tr_log, "training log CSV path");

  auto* eval = app.add_subcommand("eval", "RMSE table against the CV baseline");
  std::string ev_checkpoint, ev_output;
  eval->add_option("--checkpoint", ev_checkpoint, "checkpoint path")->required();
  eval->add_option("--output", ev_output, "RMSE CSV path");

  auto* predict = app.add_subcommand("predict", "multimodal prediction JSON");
  std::string pr_checkpoint, pr_output, pr_behavior;
  int pr_scene = 0;
  predict->add_option("--checkpoint", pr_checkpoint, "checkpoint path")
      ->required();
  predict->add_option("--scene-index", pr_scene, "scene index in the dataset");
  predict->add_option("--output", pr_output, "JSON path (default stdout)");
  predict->add_option("--export-behavior", pr_behavior,
                      "write behavior feature CSV for the scene");

  auto* heatmap = app.add_subcommand("heatmap", "predictive density grids");
  std::string hm_checkpoint, hm_prefix;
  int hm_scene = 0, hm_step = -1, hm_resolution = 150;
  double hm_sigmas = 6.0;
  heatmap->add_option("--checkpoint", hm_checkpoint, "checkpoint path")
      ->required();
  heatmap->add_option("--scene-index", hm_scene, "scene index in the dataset");
  heatmap->add_option("--step", hm_step, "future step (default: all steps)");
  heatmap->add_option("--out-prefix", hm_prefix, "output path prefix")
      ->required();
  heatmap->add_option("--sigmas", hm_sigmas, "grid extent in std deviations");
  heatmap->add_option("--resolution", hm_resolution, "cells per axis");

  auto* ablate = app.add_subcommand("ablate", "train and compare variants");
  std::string ab_output, ab_variants = "A,B,C,D,E";
  ablate->add_option("--output", ab_output, "comparison CSV path")->required();
  ablate->add_option("--variants", ab_variants,
                     "comma list of A,B,C,D,E,r0,r7.62,r15.24");

  // --config/--set live on the app and may appear after the subcommand name.
  for (auto* sub : {ingest, synth, train, eval, predict, heatmap, ablate})
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest)
      return cmd_ingest(in_input, in_output, in_export, columns, in_unit,
                        source_dt, capture_radius, merge_lanes,
                        resolve_config(config_path, sets));
    if (*synth) return cmd_synth(sy_output, resolve_config(config_path, sets));
    if (*train)
      return cmd_train(tr_checkpoint, tr_log, resolve_config(config_path, sets));
    if (*eval) return cmd_eval(ev_checkpoint, ev_output, sets);
    if (*predict)
      return cmd_predict(pr_checkpoint, pr_scene, pr_output, pr_behavior, sets);
    if (*heatmap)
      return cmd_heatmap(hm_checkpoint, hm_scene, hm_step, hm_prefix, hm_sigmas,
                         hm_resolution, sets);
    if (*ablate)
      return cmd_ablate(ab_output, ab_variants, resolve_config(config_path, sets));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
