#include "bat/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace bat::objective {

double bivariate_nll(const model::GaussianParams& g, const PolarPoint& truth) {
  const double dr = (truth.rho - g.mu_rho) / g.sigma_rho;
  const double dt = (truth.theta - g.mu_theta) / g.sigma_theta;
  const double c = g.corr;
  const double one_minus = 1.0 - c * c;
  const double z = dr * dr - 2.0 * c * dr * dt + dt * dt;
  return std::log(2.0 * M_PI) + std::log(g.sigma_rho) + std::log(g.sigma_theta) +
         0.5 * std::log(one_minus) + z / (2.0 * one_minus);
}

ad::Tensor bivariate_nll(ad::Tape& tape, ad::Tensor step, const PolarPoint& truth) {
  ad::Tensor mu_rho = tape.slice(step, 0, 1);
  ad::Tensor mu_theta = tape.slice(step, 1, 1);
  ad::Tensor sigma_rho = tape.slice(step, 2, 1);
  ad::Tensor sigma_theta = tape.slice(step, 3, 1);
  ad::Tensor corr = tape.slice(step, 4, 1);

  ad::Tensor inv_sr = tape.exp(tape.scale(tape.log(sigma_rho), -1.0));
  ad::Tensor inv_st = tape.exp(tape.scale(tape.log(sigma_theta), -1.0));
  ad::Tensor dr = tape.mul(tape.add_scalar(tape.scale(mu_rho, -1.0), truth.rho), inv_sr);
  ad::Tensor dt = tape.mul(tape.add_scalar(tape.scale(mu_theta, -1.0), truth.theta), inv_st);

  ad::Tensor one_minus = tape.add_scalar(tape.scale(tape.mul(corr, corr), -1.0), 1.0);
  ad::Tensor z = tape.add(tape.add(tape.mul(dr, dr), tape.mul(dt, dt)),
                          tape.scale(tape.mul(corr, tape.mul(dr, dt)), -2.0));
  ad::Tensor inv_two_one_minus =
      tape.scale(tape.exp(tape.scale(tape.log(one_minus), -1.0)), 0.5);

  ad::Tensor nll = tape.add_scalar(
      tape.add(tape.add(tape.log(sigma_rho), tape.log(sigma_theta)),
               tape.add(tape.scale(tape.log(one_minus), 0.5), tape.mul(z, inv_two_one_minus))),
      std::log(2.0 * M_PI));
  return nll;
}

ad::Tensor sequence_nll(ad::Tape& tape, const model::BatModel::Forward& fwd,
                        const model::BatModel::ManeuverOutput& labeled,
                        const std::vector<PolarPoint>& truth, const ManeuverClass& label) {
  if (labeled.steps.size() != truth.size())
    throw std::invalid_argument("sequence_nll: prediction and truth lengths differ");
  if (truth.empty()) throw std::invalid_argument("sequence_nll: empty trajectory");

  ad::Tensor sum = bivariate_nll(tape, labeled.steps[0], truth[0]);
  for (std::size_t t = 1; t < truth.size(); ++t)
    sum = tape.add(sum, bivariate_nll(tape, labeled.steps[t], truth[t]));
  ad::Tensor mean = tape.scale(sum, 1.0 / static_cast<double>(truth.size()));

  const int lat = static_cast<int>(label.lateral);
  const int lon = static_cast<int>(label.longitudinal);
  ad::Tensor log_lat = tape.log(tape.slice(fwd.lat_probs, lat, 1));
  ad::Tensor log_lon = tape.log(tape.slice(fwd.lon_probs, lon, 1));
  return tape.add(mean, tape.scale(tape.add(log_lat, log_lon), -1.0));
}

ad::Tensor squared_displacement(ad::Tape& tape, const model::BatModel::ManeuverOutput& labeled,
                                const std::vector<CartPoint>& truth) {
  if (labeled.steps.size() != truth.size())
    throw std::invalid_argument("squared_displacement: prediction and truth lengths differ");
  if (truth.empty()) throw std::invalid_argument("squared_displacement: empty trajectory");

  ad::Tensor sum = tape.scalar(0.0);
  for (std::size_t t = 0; t < truth.size(); ++t) {
    ad::Tensor mu_rho = tape.slice(labeled.steps[t], 0, 1);
    ad::Tensor mu_theta = tape.slice(labeled.steps[t], 1, 1);
    ad::Tensor dx = tape.add_scalar(tape.mul(mu_rho, tape.cos(mu_theta)), -truth[t].x);
    ad::Tensor dy = tape.add_scalar(tape.mul(mu_rho, tape.sin(mu_theta)), -truth[t].y);
    sum = tape.add(sum, tape.add(tape.mul(dx, dx), tape.mul(dy, dy)));
  }
  return tape.scale(sum, 1.0 / static_cast<double>(truth.size()));
}

double maneuver_ce(const std::vector<double>& lat_probs, const std::vector<double>& lon_probs,
                   const ManeuverClass& label) {
  const std::size_t lat = static_cast<std::size_t>(label.lateral);
  const std::size_t lon = static_cast<std::size_t>(label.longitudinal);
  if (lat >= lat_probs.size() || lon >= lon_probs.size())
    throw std::invalid_argument("maneuver_ce: label outside the probability vectors");
  return -std::log(std::max(lat_probs[lat], 1e-300)) -
         std::log(std::max(lon_probs[lon], 1e-300));
}

ad::Tensor maneuver_ce(ad::Tape& tape, ad::Tensor lat_probs, ad::Tensor lon_probs,
                       const ManeuverClass& label) {
  ad::Tensor log_lat = tape.log(tape.slice(lat_probs, static_cast<int>(label.lateral), 1));
  ad::Tensor log_lon = tape.log(tape.slice(lon_probs, static_cast<int>(label.longitudinal), 1));
  return tape.scale(tape.add(log_lat, log_lon), -1.0);
}

ad::Tensor total_loss(ad::Tape& tape, const model::BatModel::Forward& fwd,
                      const model::BatModel::ManeuverOutput& labeled,
                      const model::PolarScene& scene, const ManeuverClass& label,
                      const LossWeights& weights) {
  ad::Tensor loss = sequence_nll(tape, fwd, labeled, scene.ego_future_polar, label);
  loss = tape.add(loss, tape.scale(squared_displacement(tape, labeled, scene.ego_future_cart),
                                   weights.alpha_rmse));
  loss = tape.add(loss,
                  tape.scale(maneuver_ce(tape, fwd.lat_probs, fwd.lon_probs, label),
                             weights.beta_ce));
  return loss;
}

double rmse(const std::vector<CartPoint>& pred, const std::vector<CartPoint>& truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("rmse: prediction and truth lengths differ");
  if (pred.empty()) throw std::invalid_argument("rmse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double dx = pred[i].x - truth[i].x;
    const double dy = pred[i].y - truth[i].y;
    sum += dx * dx + dy * dy;
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

void adam_step(nn::ParamStore& store, AdamState& state, const AdamConfig& config) {
  for (const auto& p : store.params())
    for (std::size_t i = 0; i < p->grad.size(); ++i)
      if (!std::isfinite(p->grad[i]))
        throw std::runtime_error("adam_step: non-finite gradient in parameter " + p->name);

  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (const auto& p : store.params())
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->m[i] = config.beta1 * p->m[i] + (1.0 - config.beta1) * p->grad[i];
      p->v[i] = config.beta2 * p->v[i] + (1.0 - config.beta2) * p->grad[i] * p->grad[i];
      const double m_hat = p->m[i] / bc1;
      const double v_hat = p->v[i] / bc2;
      p->value[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
}

double cosine_warm_restart_lr(double base_lr, int epoch, int t_0, int t_mult) {
  if (t_0 < 1) throw std::invalid_argument("cosine_warm_restart_lr: T_0 must be >= 1");
  if (t_mult < 1) throw std::invalid_argument("cosine_warm_restart_lr: T_mult must be >= 1");
  int cycle_len = t_0;
  int into = epoch;
  while (into >= cycle_len) {
    into -= cycle_len;
    cycle_len *= t_mult;
  }
  return base_lr * 0.5 * (1.0 + std::cos(M_PI * static_cast<double>(into) /
                                         static_cast<double>(cycle_len)));
}

}  // namespace bat::objective
