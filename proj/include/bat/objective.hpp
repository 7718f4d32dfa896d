#pragma once

#include <vector>

#include "bat/geometry.hpp"
#include "bat/model.hpp"
#include "bat/params.hpp"
#include "bat/scene.hpp"
#include "bat/tensor.hpp"

namespace bat::objective {

struct LossWeights {
  double alpha_rmse = 1.0;
  double beta_ce = 1.0;
};

// -log bivariate normal density with correlation, plain-number form.
double bivariate_nll(const model::GaussianParams& g, const PolarPoint& truth);

// Tape form over a squashed (5) step tensor [mu_rho, mu_theta, sigma_rho,
// sigma_theta, corr].
ad::Tensor bivariate_nll(ad::Tape& tape, ad::Tensor step, const PolarPoint& truth);

// Mean over steps of the labeled maneuver's per-step NLL, minus the log
// probability of the labeled lateral and longitudinal classes (two-level
// hierarchy). `labeled` must be the decoded output for the label.
ad::Tensor sequence_nll(ad::Tape& tape, const model::BatModel::Forward& fwd,
                        const model::BatModel::ManeuverOutput& labeled,
                        const std::vector<PolarPoint>& truth, const ManeuverClass& label);

// Mean squared Cartesian displacement of the step means against the truth,
// built on the tape so it trains the means directly.
ad::Tensor squared_displacement(ad::Tape& tape, const model::BatModel::ManeuverOutput& labeled,
                                const std::vector<CartPoint>& truth);

// Factorized cross-entropy: -log P(lat) - log P(lon).
double maneuver_ce(const std::vector<double>& lat_probs, const std::vector<double>& lon_probs,
                   const ManeuverClass& label);
ad::Tensor maneuver_ce(ad::Tape& tape, ad::Tensor lat_probs, ad::Tensor lon_probs,
                       const ManeuverClass& label);

// total = sequence_nll + alpha * squared_displacement + beta * maneuver_ce.
ad::Tensor total_loss(ad::Tape& tape, const model::BatModel::Forward& fwd,
                      const model::BatModel::ManeuverOutput& labeled,
                      const model::PolarScene& scene, const ManeuverClass& label,
                      const LossWeights& weights);

// sqrt of the mean squared Euclidean error across scenes at one horizon step.
// Throws std::invalid_argument on a length mismatch.
double rmse(const std::vector<CartPoint>& pred, const std::vector<CartPoint>& truth);

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  long long step = 0;
};

// One bias-corrected Adam update over every parameter in the store using the
// accumulated grads. Scans for non-finite gradients first and throws
// std::runtime_error (naming the parameter) before touching any value.
void adam_step(nn::ParamStore& store, AdamState& state, const AdamConfig& config);

// Cosine annealing with warm restarts: lr = base/2 * (1 + cos(pi*t/T_i)),
// cycle lengths T_0, T_0*T_mult, ... Epoch counts from 0.
double cosine_warm_restart_lr(double base_lr, int epoch, int t_0, int t_mult);

}  // namespace bat::objective
