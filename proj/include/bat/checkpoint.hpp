#pragma once
// Versioned binary checkpoints: config snapshot, epoch, named parameter
// tensors, and Adam state. Reload reproduces bit-identical forward passes.

#include <memory>
#include <string>

#include "bat/config.hpp"
#include "bat/model.hpp"
#include "bat/objective.hpp"

namespace bat::harness {

struct LoadedCheckpoint {
  RunConfig config;
  int epoch = 0;
  objective::AdamState adam;
  std::unique_ptr<model::BatModel> model;
};

void save_checkpoint(const std::string& path, const model::BatModel& model,
                     const objective::AdamState& adam, const RunConfig& config,
                     int epoch);

// Rebuilds the model from the embedded config and restores every parameter
// (values and Adam moments) bitwise. Throws std::runtime_error on magic,
// version, truncation, or parameter mismatch.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace bat::harness
