#pragma once
// Seeded training loop: teacher-forced loss, deterministic batched gradient
// reduction, Adam with cosine warm restarts, per-epoch CSV log, checkpoints.

#include <array>
#include <string>
#include <vector>

#include "bat/config.hpp"
#include "bat/model.hpp"
#include "bat/objective.hpp"
#include "bat/scene.hpp"

namespace bat::harness {

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double train_nll = 0.0;
  double train_rmse = 0.0;              // at t_f, labeled-maneuver means
  std::array<double, 5> val_rmse{};     // horizons 1..5 s; NaN when skipped
};

struct TrainResult {
  std::vector<EpochStats> log;
  objective::AdamState adam;
};

// Trains in place. Writes the CSV log (header epoch,lr,train_nll,train_rmse,
// val_rmse_1s..val_rmse_5s) incrementally when log_path is nonempty, and
// keeps checkpoint_path at the newest completed epoch when nonempty. A
// non-finite loss aborts with std::runtime_error; the checkpoint file then
// still holds the last good state. Deterministic given (config, scenes).
TrainResult train_model(model::BatModel& model, const RunConfig& config,
                        const std::vector<Scene>& train,
                        const std::vector<Scene>& val,
                        const std::string& log_path,
                        const std::string& checkpoint_path);

}  // namespace bat::harness
