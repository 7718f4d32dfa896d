#include "bat/blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bat::nn {

LstmParams make_lstm(ParamStore& store, const std::string& prefix, int input_dim,
                     int hidden_dim, Rng& rng) {
  LstmParams p;
  p.input_dim = input_dim;
  p.hidden_dim = hidden_dim;
  const ad::Shape w{hidden_dim, input_dim + hidden_dim};
  p.w_i = &store.add_weight(prefix + "/w_i", w, rng);
  p.w_f = &store.add_weight(prefix + "/w_f", w, rng);
  p.w_o = &store.add_weight(prefix + "/w_o", w, rng);
  p.w_g = &store.add_weight(prefix + "/w_g", w, rng);
  p.b_i = &store.add_bias(prefix + "/b_i", hidden_dim);
  p.b_f = &store.add_bias(prefix + "/b_f", hidden_dim);
  p.b_o = &store.add_bias(prefix + "/b_o", hidden_dim);
  p.b_g = &store.add_bias(prefix + "/b_g", hidden_dim);
  // Open forget gates at init: a cell that starts near sigmoid(0) = 0.5
  // forgets its state within a few steps, which collapses long constant-input
  // unrolls onto a fixed point before training can shape them.
  std::fill(p.b_f->value.begin(), p.b_f->value.end(), 1.0);
  return p;
}

LstmState lstm_zero_state(ad::Tape& tape, int hidden_dim) {
  return {tape.zeros({hidden_dim}), tape.zeros({hidden_dim})};
}

LstmState lstm_step(ad::Tape& tape, TapeBinding& bind, const LstmParams& p,
                    ad::Tensor x, const LstmState& prev) {
  ad::Tensor z = tape.concat({x, prev.h});
  ad::Tensor i = tape.sigmoid(tape.add(tape.matmul(bind.use(*p.w_i), z), bind.use(*p.b_i)));
  ad::Tensor f = tape.sigmoid(tape.add(tape.matmul(bind.use(*p.w_f), z), bind.use(*p.b_f)));
  ad::Tensor o = tape.sigmoid(tape.add(tape.matmul(bind.use(*p.w_o), z), bind.use(*p.b_o)));
  ad::Tensor g = tape.tanh(tape.add(tape.matmul(bind.use(*p.w_g), z), bind.use(*p.b_g)));
  ad::Tensor c = tape.add(tape.mul(f, prev.c), tape.mul(i, g));
  ad::Tensor h = tape.mul(o, tape.tanh(c));
  return {h, c};
}

ad::Tensor lstm_encode(ad::Tape& tape, TapeBinding& bind, const LstmParams& p,
                       const std::vector<ad::Tensor>& sequence) {
  if (sequence.empty())
    throw std::invalid_argument("lstm_encode: empty sequence");
  LstmState state = lstm_zero_state(tape, p.hidden_dim);
  for (ad::Tensor x : sequence) state = lstm_step(tape, bind, p, x, state);
  return state.h;
}

AttentionParams make_attention(ParamStore& store, const std::string& prefix,
                               int query_dim, int key_dim, int dim, Rng& rng) {
  AttentionParams p;
  p.dim = dim;
  p.wq = &store.add_weight(prefix + "/wq", {dim, query_dim}, rng);
  p.wk = &store.add_weight(prefix + "/wk", {dim, key_dim}, rng);
  p.wv = &store.add_weight(prefix + "/wv", {dim, key_dim}, rng);
  return p;
}

AttentionResult attention(ad::Tape& tape, TapeBinding& bind, const AttentionParams& p,
                          ad::Tensor query, const std::vector<ad::Tensor>& keys) {
  if (keys.empty())
    throw std::invalid_argument("attention: at least one key is required");
  ad::Tensor q = tape.matmul(bind.use(*p.wq), query);
  std::vector<ad::Tensor> projected_keys;
  std::vector<ad::Tensor> projected_values;
  projected_keys.reserve(keys.size());
  projected_values.reserve(keys.size());
  for (ad::Tensor key : keys) {
    projected_keys.push_back(tape.matmul(bind.use(*p.wk), key));
    projected_values.push_back(tape.matmul(bind.use(*p.wv), key));
  }
  ad::Tensor key_matrix = tape.stack_rows(projected_keys);  // (k, dim)
  ad::Tensor scores = tape.scale(tape.matmul(key_matrix, q), 1.0 / std::sqrt(p.dim));
  ad::Tensor weights = tape.softmax(scores);

  ad::Tensor value_matrix = tape.stack_rows(projected_values);  // (k, dim)
  ad::Tensor weights_row = tape.reshape(weights, {1, static_cast<int>(keys.size())});
  ad::Tensor context = tape.reshape(tape.matmul(weights_row, value_matrix), {p.dim});
  return {weights, context};
}

ad::Tensor max_pool_agents(ad::Tape& tape, const std::vector<ad::Tensor>& vectors, int dim) {
  if (vectors.empty()) return tape.zeros({dim});
  ad::Tensor pooled = vectors[0];
  for (std::size_t i = 1; i < vectors.size(); ++i) pooled = tape.vmax(pooled, vectors[i]);
  return pooled;
}

DenseParams make_dense(ParamStore& store, const std::string& prefix, int in, int out,
                       Activation act, Rng& rng) {
  DenseParams p;
  p.w = &store.add_weight(prefix + "/w", {out, in}, rng);
  p.b = &store.add_bias(prefix + "/b", out);
  p.act = act;
  return p;
}

ad::Tensor embed(ad::Tape& tape, TapeBinding& bind, const DenseParams& p, ad::Tensor x) {
  ad::Tensor y = tape.add(tape.matmul(bind.use(*p.w), x), bind.use(*p.b));
  switch (p.act) {
    case Activation::none: return y;
    case Activation::leaky: return tape.leaky_relu(y, kLeakySlope);
    case Activation::tanh: return tape.tanh(y);
    case Activation::softmax: return tape.softmax(y);
  }
  return y;
}

MlpParams make_mlp(ParamStore& store, const std::string& prefix, const std::vector<int>& dims,
                   const std::vector<Activation>& acts, Rng& rng) {
  if (dims.size() < 2 || acts.size() != dims.size() - 1)
    throw std::invalid_argument("make_mlp: dims/acts sizes do not chain");
  MlpParams p;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    p.layers.push_back(make_dense(store, prefix + "/l" + std::to_string(l), dims[l],
                                  dims[l + 1], acts[l], rng));
  return p;
}

ad::Tensor mlp(ad::Tape& tape, TapeBinding& bind, const MlpParams& p, ad::Tensor x) {
  ad::Tensor y = x;
  for (const DenseParams& layer : p.layers) y = embed(tape, bind, layer, y);
  return y;
}

}  // namespace bat::nn
