#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "bat/rng.hpp"
#include "bat/tensor.hpp"

namespace bat::nn {

// One named trainable array with its gradient accumulator and Adam moments.
struct Param {
  std::string name;
  ad::Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> m;
  std::vector<double> v;
  std::size_t offset = 0;  // position in the flat gradient layout
};

// Insertion-ordered registry of parameters. Iteration order is creation
// order, which fixes the flat layout and keeps training deterministic.
class ParamStore {
 public:
  // Uniform init in +/- 1/sqrt(fan_in) with fan_in = last dimension.
  Param& add_weight(const std::string& name, ad::Shape shape, Rng& rng);
  // Zero init.
  Param& add_bias(const std::string& name, int n);

  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;

  const std::vector<std::unique_ptr<Param>>& params() const { return params_; }
  std::size_t total_size() const { return total_; }

  void zero_grad();
  // p.grad += scale * flat[p.offset ...] for every parameter.
  void accumulate_flat(const std::vector<double>& flat, double scale);

 private:
  Param& add(const std::string& name, ad::Shape shape, std::vector<double> value);
  std::vector<std::unique_ptr<Param>> params_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t total_ = 0;
};

// Per-tape view of a ParamStore: each parameter becomes one leaf per tape,
// memoized so repeated uses share the leaf and gradients fan in correctly.
class TapeBinding {
 public:
  explicit TapeBinding(ad::Tape& tape) : tape_(&tape) {}

  ad::Tensor use(Param& p);

  // After tape.backward: grad accumulation, either straight into the params
  // or into a flat buffer for deterministic cross-thread reduction.
  void accumulate_grads(double scale = 1.0);
  void export_grads(std::vector<double>& flat, double scale = 1.0) const;

 private:
  ad::Tape* tape_;
  std::unordered_map<Param*, ad::Tensor> leaves_;
};

}  // namespace bat::nn
