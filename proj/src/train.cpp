#include "bat/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "bat/checkpoint.hpp"
#include "bat/eval.hpp"
#include "bat/rng.hpp"

namespace bat::harness {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TrainResult train_model(model::BatModel& model, const RunConfig& config,
                        const std::vector<Scene>& train,
                        const std::vector<Scene>& val,
                        const std::string& log_path,
                        const std::string& checkpoint_path) {
  if (train.empty()) throw std::invalid_argument("train_model: empty training set");
  if (config.batch_size < 1) throw std::invalid_argument("train_model: batch_size < 1");
  if (config.epochs < 0) throw std::invalid_argument("train_model: epochs < 0");

  const std::size_t n = train.size();
  std::vector<model::PolarScene> polar;
  std::vector<ManeuverClass> labels;
  std::vector<int> joints;
  polar.reserve(n);
  labels.reserve(n);
  joints.reserve(n);
  for (const Scene& scene : train) {
    polar.push_back(model::preprocess(scene, config.model));
    labels.push_back(scene.maneuver_label);
    joints.push_back(joint_index(scene.maneuver_label));
  }

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw std::runtime_error(log_path + ": cannot open for writing");
    log.precision(10);
    log << "epoch,lr,train_nll,train_rmse,val_rmse_1s,val_rmse_2s,val_rmse_3s,"
           "val_rmse_4s,val_rmse_5s\n";
  }

  TrainResult result;
  objective::AdamState adam;
  auto save = [&](int completed_epochs) {
    if (!checkpoint_path.empty())
      save_checkpoint(checkpoint_path, model, adam, config, completed_epochs);
  };
  save(0);

  const std::size_t flat_size = model.store().total_size();
  const int nthreads = std::max(1, config.threads);
  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr =
        objective::cosine_warm_restart_lr(config.adam.lr, epoch, config.t_0, config.t_mult);
    Rng shuffle_rng(mix_seed(config.seed, 0xE9000ULL + static_cast<uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double nll_sum = 0.0;
    double final_sq_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t batch_n = std::min(batch_size, n - start);
      model.store().zero_grad();

      const int nchunks = nthreads;
      std::vector<std::vector<double>> chunk_flat(static_cast<std::size_t>(nchunks));
      std::vector<double> chunk_nll(static_cast<std::size_t>(nchunks), 0.0);
      std::vector<double> chunk_sq(static_cast<std::size_t>(nchunks), 0.0);
      std::vector<std::string> chunk_error(static_cast<std::size_t>(nchunks));

#pragma omp parallel for num_threads(nthreads) schedule(static)
      for (int c = 0; c < nchunks; ++c) {
        const std::size_t uc = static_cast<std::size_t>(c);
        try {
          const std::size_t lo = start + batch_n * uc / static_cast<std::size_t>(nchunks);
          const std::size_t hi =
              start + batch_n * (uc + 1) / static_cast<std::size_t>(nchunks);
          if (lo < hi) chunk_flat[uc].assign(flat_size, 0.0);
          for (std::size_t s = lo; s < hi; ++s) {
            const std::size_t idx = order[s];
            ad::Tape tape;
            nn::TapeBinding bind(tape);
            model::BatModel::Forward fwd =
                model.forward(tape, bind, polar[idx], {joints[idx]});
            const model::BatModel::ManeuverOutput& mo = fwd.outputs[0];
            ad::Tensor nll = objective::sequence_nll(
                tape, fwd, mo, polar[idx].ego_future_polar, labels[idx]);
            ad::Tensor sq = objective::squared_displacement(
                tape, mo, polar[idx].ego_future_cart);
            ad::Tensor ce = objective::maneuver_ce(tape, fwd.lat_probs, fwd.lon_probs,
                                                   labels[idx]);
            ad::Tensor loss = tape.add(
                nll, tape.add(tape.scale(sq, config.loss.alpha_rmse),
                              tape.scale(ce, config.loss.beta_ce)));
            const double loss_value = tape.scalar_value(loss);
            if (!std::isfinite(loss_value))
              throw std::runtime_error("non-finite loss");
            tape.backward(loss);
            bind.export_grads(chunk_flat[uc], 1.0);
            chunk_nll[uc] += tape.scalar_value(nll);
            const std::vector<double>& last = tape.value(mo.steps.back());
            const CartPoint got = polar_to_cart({last[0], last[1]}, {});
            const CartPoint& want = polar[idx].ego_future_cart.back();
            const double dx = got.x - want.x;
            const double dy = got.y - want.y;
            chunk_sq[uc] += dx * dx + dy * dy;
          }
        } catch (const std::exception& e) {
          chunk_error[uc] = e.what();
        }
      }

      for (int c = 0; c < nchunks; ++c) {
        const std::size_t uc = static_cast<std::size_t>(c);
        if (!chunk_error[uc].empty())
          throw std::runtime_error(
              "training aborted at epoch " + std::to_string(epoch) + ": " +
              chunk_error[uc] +
              (checkpoint_path.empty()
                   ? std::string()
                   : " (last good checkpoint: " + checkpoint_path + ")"));
        if (!chunk_flat[uc].empty())
          model.store().accumulate_flat(chunk_flat[uc],
                                        1.0 / static_cast<double>(batch_n));
        nll_sum += chunk_nll[uc];
        final_sq_sum += chunk_sq[uc];
      }

      objective::AdamConfig step_config = config.adam;
      step_config.lr = lr;
      try {
        objective::adam_step(model.store(), adam, step_config);
      } catch (const std::exception& e) {
        throw std::runtime_error(
            "training aborted at epoch " + std::to_string(epoch) + ": " + e.what() +
            (checkpoint_path.empty()
                 ? std::string()
                 : " (last good checkpoint: " + checkpoint_path + ")"));
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_nll = nll_sum / static_cast<double>(n);
    stats.train_rmse = std::sqrt(final_sq_sum / static_cast<double>(n));
    stats.val_rmse = {kNaN, kNaN, kNaN, kNaN, kNaN};
    const bool run_val = !val.empty() && config.val_every > 0 &&
                         ((epoch + 1) % config.val_every == 0 ||
                          epoch + 1 == config.epochs);
    if (run_val) stats.val_rmse = evaluate(model, val, config.rmse_mode).model_rmse;

    if (log.is_open()) {
      log << stats.epoch << ',' << stats.lr << ',' << stats.train_nll << ','
          << stats.train_rmse;
      for (double v : stats.val_rmse) log << ',' << v;
      log << '\n';
      log.flush();
    }
    result.log.push_back(stats);
    save(epoch + 1);
  }
  result.adam = adam;
  return result;
}

}  // namespace bat::harness
