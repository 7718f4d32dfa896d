#pragma once

#include <string>
#include <vector>

#include "bat/params.hpp"
#include "bat/tensor.hpp"

namespace bat::nn {

// Standard LSTM cell over the concatenation [x; h_prev]. All four gates are
// (hidden x (input + hidden)) weights plus hidden-sized biases.
struct LstmParams {
  int input_dim = 0;
  int hidden_dim = 0;
  Param* w_i = nullptr;
  Param* w_f = nullptr;
  Param* w_o = nullptr;
  Param* w_g = nullptr;
  Param* b_i = nullptr;
  Param* b_f = nullptr;
  Param* b_o = nullptr;
  Param* b_g = nullptr;
};

LstmParams make_lstm(ParamStore& store, const std::string& prefix, int input_dim,
                     int hidden_dim, Rng& rng);

struct LstmState {
  ad::Tensor h;
  ad::Tensor c;
};

LstmState lstm_zero_state(ad::Tape& tape, int hidden_dim);

// Gating: i,f,o = sigmoid, g = tanh, c = f*c_prev + i*g, h = o*tanh(c).
LstmState lstm_step(ad::Tape& tape, TapeBinding& bind, const LstmParams& p,
                    ad::Tensor x, const LstmState& prev);

// Fold of lstm_step from the zero state; returns the final hidden state.
// Throws std::invalid_argument on an empty sequence.
ad::Tensor lstm_encode(ad::Tape& tape, TapeBinding& bind, const LstmParams& p,
                       const std::vector<ad::Tensor>& sequence);

// Single-head scaled dot-product attention.
struct AttentionParams {
  int dim = 0;  // projection dim shared by query and keys
  Param* wq = nullptr;
  Param* wk = nullptr;
  Param* wv = nullptr;
};

AttentionParams make_attention(ParamStore& store, const std::string& prefix,
                               int query_dim, int key_dim, int dim, Rng& rng);

struct AttentionResult {
  ad::Tensor weights;  // (k), sums to 1
  ad::Tensor context;  // (dim)
};

// scores_i = (Wq q) . (Wk key_i) / sqrt(dim); context = sum softmax_i Wv key_i.
// Throws std::invalid_argument when keys is empty.
AttentionResult attention(ad::Tape& tape, TapeBinding& bind, const AttentionParams& p,
                          ad::Tensor query, const std::vector<ad::Tensor>& keys);

// Elementwise max over a set of equal-dim vectors; empty set -> zeros(dim).
ad::Tensor max_pool_agents(ad::Tape& tape, const std::vector<ad::Tensor>& vectors, int dim);

enum class Activation { none, leaky, tanh, softmax };

// One dense layer: activation(Wx + b).
struct DenseParams {
  Param* w = nullptr;
  Param* b = nullptr;
  Activation act = Activation::none;
};

DenseParams make_dense(ParamStore& store, const std::string& prefix, int in, int out,
                       Activation act, Rng& rng);

ad::Tensor embed(ad::Tape& tape, TapeBinding& bind, const DenseParams& p, ad::Tensor x);

struct MlpParams {
  std::vector<DenseParams> layers;
};

// dims = {in, hidden..., out}; acts has dims.size()-1 entries.
MlpParams make_mlp(ParamStore& store, const std::string& prefix, const std::vector<int>& dims,
                   const std::vector<Activation>& acts, Rng& rng);

ad::Tensor mlp(ad::Tape& tape, TapeBinding& bind, const MlpParams& p, ad::Tensor x);

// Slope shared by every leaky activation in the network.
constexpr double kLeakySlope = 0.1;

}  // namespace bat::nn
