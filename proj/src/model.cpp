#include "bat/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace bat::model {

namespace {

CartPoint to_canonical(const CartPoint& p, const CartPoint& origin, double rotation) {
  return rotate({p.x - origin.x, p.y - origin.y}, rotation);
}

std::array<double, 2> encoder_input(const CartPoint& canonical, bool cartesian) {
  if (cartesian) return {canonical.x, canonical.y};
  const PolarPoint polar = cart_to_polar(canonical, Frame{{0.0, 0.0}});
  return {polar.rho, polar.theta};
}

}  // namespace

PolarScene preprocess(const Scene& scene, const BatConfig& config) {
  if (scene.ego_history.empty())
    throw std::invalid_argument("preprocess: empty ego history");

  PolarScene out;
  const std::size_t ref = scene.ego_history.size() - 1;
  out.origin = scene.ego_history[ref];

  out.rotation = 0.0;
  if (ref >= 1) {
    const double hx = scene.ego_history[ref].x - scene.ego_history[ref - 1].x;
    const double hy = scene.ego_history[ref].y - scene.ego_history[ref - 1].y;
    if (std::hypot(hx, hy) >= 1e-12) out.rotation = M_PI / 2.0 - std::atan2(hy, hx);
  }

  out.ego_inputs.reserve(scene.ego_history.size());
  for (const CartPoint& p : scene.ego_history)
    out.ego_inputs.push_back(
        encoder_input(to_canonical(p, out.origin, out.rotation), config.cartesian_input));

  for (const NeighborTrack& nb : scene.neighbors) {
    if (ref >= nb.present.size() || !nb.present[ref]) continue;
    const double gap = distance(nb.positions[ref], scene.ego_history[ref]);
    if (gap <= 0.0 || gap > config.r) continue;
    std::size_t first = ref;
    while (first > 0 && nb.present[first - 1]) --first;
    std::vector<std::array<double, 2>> inputs;
    inputs.reserve(scene.ego_history.size() - first);
    for (std::size_t t = first; t <= ref; ++t)
      inputs.push_back(
          encoder_input(to_canonical(nb.positions[t], out.origin, out.rotation),
                        config.cartesian_input));
    out.neighbor_ids.push_back(nb.id);
    out.neighbor_inputs.push_back(std::move(inputs));
  }

  out.ego_future_polar.reserve(scene.ego_future.size());
  out.ego_future_cart.reserve(scene.ego_future.size());
  for (const CartPoint& p : scene.ego_future) {
    const CartPoint canonical = to_canonical(p, out.origin, out.rotation);
    out.ego_future_cart.push_back(canonical);
    out.ego_future_polar.push_back(cart_to_polar(canonical, Frame{{0.0, 0.0}}));
  }

  if (config.use_behavior)
    out.behavior = graph::behavior_features(scene, config.r, scene.dt > 0.0 ? scene.dt : config.dt);
  return out;
}

BatModel::BatModel(const BatConfig& config, unsigned long long seed) : config_(config) {
  Rng rng(seed);
  behavior_lstm_ = nn::make_lstm(store_, "behavior/lstm", 6, config_.behavior_dim, rng);
  position_embed_ = nn::make_dense(store_, "interaction/embed", 2, config_.embed_dim,
                                   nn::Activation::leaky, rng);
  interaction_lstm_ = nn::make_lstm(store_, "interaction/lstm", config_.embed_dim,
                                    config_.interaction_dim, rng);
  position_lstm_ = nn::make_lstm(store_, "position/lstm", 2, config_.position_dim, rng);
  priority_attention_ = nn::make_attention(store_, "priority/attention", config_.position_dim,
                                           config_.interaction_dim, config_.interaction_dim, rng);
  priority_mlp_ = nn::make_mlp(store_, "priority/mlp",
                               {config_.interaction_dim, config_.priority_hidden,
                                config_.interaction_dim},
                               {nn::Activation::leaky, nn::Activation::none}, rng);
  const int context_dim = config_.position_dim + config_.interaction_dim + config_.behavior_dim;
  encoding_embed_ = nn::make_dense(store_, "encoding/embed", context_dim, config_.encoding_dim,
                                   nn::Activation::softmax, rng);
  encoding_mlp_ = nn::make_mlp(store_, "encoding/mlp", {config_.encoding_dim, config_.encoding_dim},
                               {nn::Activation::leaky}, rng);
  lat_head_ = nn::make_dense(store_, "maneuver/lat", config_.encoding_dim, 3,
                             nn::Activation::softmax, rng);
  lon_head_ = nn::make_dense(store_, "maneuver/lon", config_.encoding_dim, 3,
                             nn::Activation::softmax, rng);
  decoder_lstm_ = nn::make_lstm(store_, "decoder/lstm", context_dim + kManeuverCount,
                                config_.decoder_dim, rng);
  decoder_head_ = nn::make_dense(store_, "decoder/head", config_.decoder_dim, 5,
                                 nn::Activation::none, rng);

  // Start the emitted sigmas near the scale of the targets (a few meters
  // radially, ~1 rad angularly) instead of softplus(0) ~= 0.7. With tight
  // initial sigmas the early NLL mean-gradients scale like error/sigma^2 and
  // a single bad scene can blow the shared recurrent weights apart before
  // anything has been learned; data-scale sigmas let the fit tighten first.
  decoder_head_.b->value[2] = 2.5;
  decoder_head_.b->value[3] = 0.5;
}

ad::Tensor squash_step(ad::Tape& tape, ad::Tensor raw) {
  ad::Tensor means = tape.slice(raw, 0, 2);
  ad::Tensor sigmas =
      tape.add_scalar(tape.softplus(tape.slice(raw, 2, 2)), 1e-3);
  ad::Tensor corr = tape.scale(tape.tanh(tape.slice(raw, 4, 1)), 0.99);
  return tape.concat({means, sigmas, corr});
}

// Meter-scale ranges (tens of meters, BLE/BIE spikes) saturate the gate
// nonlinearities at init and kill their gradients; a fixed input scale keeps
// encoder inputs O(1) without touching the polar output contract.
constexpr double kInputScale = 0.1;

namespace {
void debug_stage(const ad::Tape& tape, const char* name, ad::Tensor t) {
  static const bool on = std::getenv("BAT_DEBUG_STAGES") != nullptr;
  if (!on) return;
  std::fprintf(stderr, "STAGE %s", name);
  for (double v : tape.value(t)) std::fprintf(stderr, " %.17e", v);
  std::fprintf(stderr, "\n");
}
}  // namespace

ad::Tensor BatModel::context_vector(ad::Tape& tape, nn::TapeBinding& bind,
                                    const PolarScene& scene, ad::Tensor* attention_out,
                                    bool* has_attention) const {
  *has_attention = false;
  // angles are already O(1); only the radial/Cartesian components get scaled
  auto input_leaf = [&](const std::array<double, 2>& p) {
    return tape.leaf({2}, {p[0] * kInputScale,
                           config_.cartesian_input ? p[1] * kInputScale : p[1]});
  };

  // position-aware: ego (rho, theta) sequence straight into its LSTM
  std::vector<ad::Tensor> ego_seq;
  ego_seq.reserve(scene.ego_inputs.size());
  for (const auto& p : scene.ego_inputs) ego_seq.push_back(input_leaf(p));
  ad::Tensor position_vec = nn::lstm_encode(tape, bind, position_lstm_, ego_seq);

  // interaction-aware: per-neighbor embed + shared LSTM
  ad::Tensor pooled = tape.zeros({config_.interaction_dim});
  if (config_.use_interaction && !scene.neighbor_inputs.empty()) {
    std::vector<ad::Tensor> hiddens;
    hiddens.reserve(scene.neighbor_inputs.size());
    for (const auto& track : scene.neighbor_inputs) {
      std::vector<ad::Tensor> seq;
      seq.reserve(track.size());
      for (const auto& p : track)
        seq.push_back(nn::embed(tape, bind, position_embed_, input_leaf(p)));
      hiddens.push_back(nn::lstm_encode(tape, bind, interaction_lstm_, seq));
    }
    if (config_.use_priority) {
      nn::AttentionResult att =
          nn::attention(tape, bind, priority_attention_, position_vec, hiddens);
      std::vector<ad::Tensor> weighted;
      weighted.reserve(hiddens.size());
      for (std::size_t i = 0; i < hiddens.size(); ++i)
        weighted.push_back(nn::mlp(
            tape, bind, priority_mlp_,
            tape.smul(hiddens[i], tape.slice(att.weights, static_cast<int>(i), 1))));
      pooled = nn::max_pool_agents(tape, weighted, config_.interaction_dim);
      *attention_out = att.weights;
      *has_attention = true;
    } else {
      ad::Tensor sum = hiddens[0];
      for (std::size_t i = 1; i < hiddens.size(); ++i) sum = tape.add(sum, hiddens[i]);
      pooled = tape.scale(sum, 1.0 / static_cast<double>(hiddens.size()));
    }
  }

  // behavior-aware: shared LSTM over each agent's 6-vector series, mean-aggregated
  ad::Tensor behavior_vec = tape.zeros({config_.behavior_dim});
  if (config_.use_behavior && !scene.behavior.features.empty()) {
    ad::Tensor sum = tape.zeros({config_.behavior_dim});
    for (const auto& agent : scene.behavior.features) {
      std::vector<ad::Tensor> seq;
      seq.reserve(agent.size());
      for (const auto& frame : agent) {
        std::vector<double> v(frame.begin(), frame.end());
        for (double& x : v) x *= kInputScale;
        seq.push_back(tape.leaf({6}, v));
      }
      sum = tape.add(sum, nn::lstm_encode(tape, bind, behavior_lstm_, seq));
    }
    behavior_vec = tape.scale(sum, 1.0 / static_cast<double>(scene.behavior.features.size()));
  }

  return tape.concat({position_vec, pooled, behavior_vec});
}

BatModel::Forward BatModel::forward(ad::Tape& tape, nn::TapeBinding& bind,
                                    const PolarScene& scene,
                                    const std::vector<int>& maneuvers) const {
  Forward out;
  ad::Tensor context = context_vector(tape, bind, scene, &out.attention, &out.has_attention);
  ad::Tensor embedded = nn::embed(tape, bind, encoding_embed_, context);
  ad::Tensor encoding = nn::mlp(tape, bind, encoding_mlp_, embedded);
  debug_stage(tape, "context", context);
  debug_stage(tape, "embedded", embedded);
  debug_stage(tape, "encoding", encoding);

  out.lat_probs = nn::embed(tape, bind, lat_head_, encoding);
  out.lon_probs = nn::embed(tape, bind, lon_head_, encoding);

  const int steps = config_.future_steps();
  for (int m : maneuvers) {
    if (m < 0 || m >= kManeuverCount)
      throw std::invalid_argument("forward: maneuver index outside the 9 classes");
    std::vector<double> onehot(kManeuverCount, 0.0);
    onehot[static_cast<std::size_t>(m)] = 1.0;
    // The decoder unrolls on the repeated context vector itself; the softmax
    // embedding and its MLP feed only the maneuver heads.
    ad::Tensor decoder_in = tape.concat({context, tape.leaf({kManeuverCount}, onehot)});

    ManeuverOutput mo;
    mo.maneuver = m;
    nn::LstmState state = nn::lstm_zero_state(tape, config_.decoder_dim);
    for (int t = 0; t < steps; ++t) {
      state = nn::lstm_step(tape, bind, decoder_lstm_, decoder_in, state);
      mo.steps.push_back(squash_step(tape, nn::embed(tape, bind, decoder_head_, state.h)));
    }
    if (m == maneuvers.front()) debug_stage(tape, "decoder_h_final", state.h);
    out.outputs.push_back(std::move(mo));
  }
  return out;
}

MultimodalPrediction BatModel::predict(const Scene& scene) const {
  return predict(preprocess(scene, config_));
}

MultimodalPrediction BatModel::predict(const PolarScene& scene) const {
  ad::Tape tape;
  nn::TapeBinding bind(tape);
  std::vector<int> all(kManeuverCount);
  for (int m = 0; m < kManeuverCount; ++m) all[static_cast<std::size_t>(m)] = m;
  Forward fwd = forward(tape, bind, scene, all);

  MultimodalPrediction pred;
  const auto& lat = tape.value(fwd.lat_probs);
  const auto& lon = tape.value(fwd.lon_probs);
  for (int m = 0; m < kManeuverCount; ++m)
    pred.maneuver_probs[static_cast<std::size_t>(m)] =
        lat[static_cast<std::size_t>(m / 3)] * lon[static_cast<std::size_t>(m % 3)];

  for (const ManeuverOutput& mo : fwd.outputs) {
    auto& traj = pred.trajectories[static_cast<std::size_t>(mo.maneuver)];
    traj.reserve(mo.steps.size());
    for (ad::Tensor step : mo.steps) {
      const auto& v = tape.value(step);
      traj.push_back({v[0], v[1], v[2], v[3], v[4]});
    }
  }

  if (fwd.has_attention) {
    pred.attention_ids = scene.neighbor_ids;
    pred.attention_weights = tape.value(fwd.attention);
  }
  return pred;
}

double gaussian_density(const GaussianParams& g, const PolarPoint& point) {
  const double dr = (point.rho - g.mu_rho) / g.sigma_rho;
  const double dt = (point.theta - g.mu_theta) / g.sigma_theta;
  const double c = g.corr;
  const double one_minus = 1.0 - c * c;
  const double z = dr * dr - 2.0 * c * dr * dt + dt * dt;
  return std::exp(-z / (2.0 * one_minus)) /
         (2.0 * M_PI * g.sigma_rho * g.sigma_theta * std::sqrt(one_minus));
}

double mixture_density(const MultimodalPrediction& pred, const PolarPoint& point, int step) {
  double density = 0.0;
  for (int m = 0; m < kManeuverCount; ++m) {
    const auto& traj = pred.trajectories[static_cast<std::size_t>(m)];
    if (step < 0 || static_cast<std::size_t>(step) >= traj.size())
      throw std::out_of_range("mixture_density: step outside the prediction horizon");
    density += pred.maneuver_probs[static_cast<std::size_t>(m)] *
               gaussian_density(traj[static_cast<std::size_t>(step)], point);
  }
  return density;
}

}  // namespace bat::model
