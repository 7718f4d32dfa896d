#pragma once

#include <array>
#include <string>
#include <vector>

#include "bat/blocks.hpp"
#include "bat/geometry.hpp"
#include "bat/graph.hpp"
#include "bat/params.hpp"
#include "bat/scene.hpp"
#include "bat/tensor.hpp"

namespace bat::model {

// Network and preprocessing configuration. The four ablation switches map to
// the A-E model variants: cartesian_input (A), use_behavior off (B),
// use_interaction off (C), use_priority off (D), everything on (E).
struct BatConfig {
  int behavior_dim = 32;
  int interaction_dim = 64;
  int position_dim = 64;
  int decoder_dim = 128;
  int embed_dim = 32;       // position-encoding layer ahead of the interaction LSTM
  int priority_hidden = 64; // hidden width of the priority MLP
  int encoding_dim = 128;   // behavior embedding/encoding width ahead of the heads
  double r = 7.62;
  double t_h = 3.0;
  double t_f = 5.0;
  double dt = 0.2;
  bool cartesian_input = false;
  bool use_behavior = true;
  bool use_interaction = true;
  bool use_priority = true;

  int history_steps() const { return static_cast<int>(t_h / dt + 0.5); }
  int future_steps() const { return static_cast<int>(t_f / dt + 0.5); }
};

// Per-step bivariate Gaussian over (rho, theta).
struct GaussianParams {
  double mu_rho = 0.0;
  double mu_theta = 0.0;
  double sigma_rho = 1.0;
  double sigma_theta = 1.0;
  double corr = 0.0;
};

struct MultimodalPrediction {
  std::array<double, kManeuverCount> maneuver_probs{};
  std::array<std::vector<GaussianParams>, kManeuverCount> trajectories;
  std::vector<int> attention_ids;       // eligible neighbor ids
  std::vector<double> attention_weights;
};

// Scene after canonicalization: translated so the ego reference point is the
// origin and rotated so the ego heading at the reference time points along
// +y. All model inputs and outputs live in this frame, which is what makes
// predictions invariant under rigid motion of the raw scene.
struct PolarScene {
  std::vector<std::array<double, 2>> ego_inputs;  // (rho, theta), or (x, y) for Model A
  std::vector<int> neighbor_ids;                  // interaction-eligible neighbors
  std::vector<std::vector<std::array<double, 2>>> neighbor_inputs;  // present suffix
  std::vector<PolarPoint> ego_future_polar;
  std::vector<CartPoint> ego_future_cart;
  graph::BehaviorSeries behavior;
  CartPoint origin;        // world position of the canonical origin
  double rotation = 0.0;   // world-to-canonical rotation angle
};

// Canonicalizes and gates the scene. Interaction-eligible neighbors are the
// ego's DGG neighborhood at the reference frame: present there and within
// (0, r] of the ego. r=0 therefore yields an empty eligible set.
PolarScene preprocess(const Scene& scene, const BatConfig& config);

class BatModel {
 public:
  BatModel(const BatConfig& config, unsigned long long seed);

  const BatConfig& config() const { return config_; }
  nn::ParamStore& store() { return store_; }
  const nn::ParamStore& store() const { return store_; }

  struct ManeuverOutput {
    int maneuver = 0;
    std::vector<ad::Tensor> steps;  // future_steps tensors of shape (5), squashed
  };

  struct Forward {
    ad::Tensor lat_probs;  // (3)
    ad::Tensor lon_probs;  // (3)
    std::vector<ManeuverOutput> outputs;
    bool has_attention = false;
    ad::Tensor attention;  // (k) over neighbor_ids, valid iff has_attention
  };

  // Tape-based forward decoding exactly the requested maneuvers (training
  // decodes the labeled one; inference decodes all nine).
  Forward forward(ad::Tape& tape, nn::TapeBinding& bind, const PolarScene& scene,
                  const std::vector<int>& maneuvers) const;

  // Value-only inference over all nine maneuvers.
  MultimodalPrediction predict(const Scene& scene) const;
  MultimodalPrediction predict(const PolarScene& scene) const;

 private:
  ad::Tensor context_vector(ad::Tape& tape, nn::TapeBinding& bind, const PolarScene& scene,
                            ad::Tensor* attention_out, bool* has_attention) const;

  BatConfig config_;
  nn::ParamStore store_;
  nn::LstmParams behavior_lstm_;
  nn::DenseParams position_embed_;
  nn::LstmParams interaction_lstm_;
  nn::LstmParams position_lstm_;
  nn::AttentionParams priority_attention_;
  nn::MlpParams priority_mlp_;
  nn::DenseParams encoding_embed_;
  nn::MlpParams encoding_mlp_;
  nn::DenseParams lat_head_;
  nn::DenseParams lon_head_;
  nn::LstmParams decoder_lstm_;
  nn::DenseParams decoder_head_;
};

// Squash raw (5) decoder output: sigmas via softplus + 1e-3 floor, corr via
// 0.99*tanh; means pass through.
ad::Tensor squash_step(ad::Tape& tape, ad::Tensor raw);

// Density of the maneuver mixture at a (rho, theta) point for one future
// step. Throws std::out_of_range on an invalid step index.
double mixture_density(const MultimodalPrediction& pred, const PolarPoint& point, int step);

// Density of one bivariate component at (rho, theta).
double gaussian_density(const GaussianParams& g, const PolarPoint& point);

}  // namespace bat::model
