#pragma once
// Flat key=value run configuration with strict unknown-key rejection.
// Precedence: built-in defaults, then config file, then CLI overrides.

#include <array>
#include <string>

#include "bat/model.hpp"
#include "bat/objective.hpp"

namespace bat::harness {

struct RunConfig {
  model::BatConfig model;
  objective::LossWeights loss;
  objective::AdamConfig adam;
  int epochs = 12;
  int batch_size = 256;
  int t_0 = 3;
  int t_mult = 2;
  int val_every = 1;  // epochs between validation passes; 0 disables
  int threads = 1;    // parallel batch workers (reduction order stays fixed)
  unsigned long long seed = 1;

  std::string dataset;  // scene cache path; empty selects the synthetic corpus
  std::string synth_kind = "corpus";  // corpus|constant_velocity|lane_change|roundabout_arc
  int synth_scenes = 600;
  double synth_noise = 0.1;
  std::array<double, 3> fractions{0.7, 0.1, 0.2};
  std::string split_mode = "overall";  // overall|maneuver_based
  double subsample = 1.0;
  std::string rmse_mode = "best";  // best|weighted
};

// Applies one key=value entry; throws std::invalid_argument on unknown keys
// or unparseable values.
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

// Reads a file of key=value lines ('#' starts a comment) on top of `config`.
void load_config_file(RunConfig& config, const std::string& path);

// Full key=value dump in fixed key order; load_config_file round-trips it.
std::string serialize_config(const RunConfig& config);

}  // namespace bat::harness
