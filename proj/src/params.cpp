#include "bat/params.hpp"

#include <cmath>
#include <stdexcept>

namespace bat::nn {

Param& ParamStore::add(const std::string& name, ad::Shape shape, std::vector<double> value) {
  if (index_.count(name))
    throw std::invalid_argument("ParamStore: duplicate parameter name " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->shape = std::move(shape);
  p->value = std::move(value);
  p->grad.assign(p->value.size(), 0.0);
  p->m.assign(p->value.size(), 0.0);
  p->v.assign(p->value.size(), 0.0);
  p->offset = total_;
  total_ += p->value.size();
  index_[name] = params_.size();
  params_.push_back(std::move(p));
  return *params_.back();
}

Param& ParamStore::add_weight(const std::string& name, ad::Shape shape, Rng& rng) {
  const int fan_in = shape.back();
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<double> value(static_cast<std::size_t>(ad::numel(shape)));
  for (double& v : value) v = rng.uniform(-bound, bound);
  return add(name, std::move(shape), std::move(value));
}

Param& ParamStore::add_bias(const std::string& name, int n) {
  return add(name, {n}, std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

Param* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

const Param* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : params_[it->second].get();
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.assign(p->grad.size(), 0.0);
}

void ParamStore::accumulate_flat(const std::vector<double>& flat, double scale) {
  if (flat.size() != total_)
    throw std::invalid_argument("ParamStore: flat gradient buffer has the wrong size");
  for (auto& p : params_)
    for (std::size_t i = 0; i < p->grad.size(); ++i)
      p->grad[i] += scale * flat[p->offset + i];
}

ad::Tensor TapeBinding::use(Param& p) {
  auto it = leaves_.find(&p);
  if (it != leaves_.end()) return it->second;
  ad::Tensor leaf = tape_->leaf(p.shape, p.value);
  leaves_.emplace(&p, leaf);
  return leaf;
}

void TapeBinding::accumulate_grads(double scale) {
  for (auto& [param, leaf] : leaves_) {
    const auto& g = tape_->grad(leaf);
    if (g.empty()) continue;  // backward not run over this leaf
    for (std::size_t i = 0; i < g.size(); ++i) param->grad[i] += scale * g[i];
  }
}

void TapeBinding::export_grads(std::vector<double>& flat, double scale) const {
  for (const auto& [param, leaf] : leaves_) {
    const auto& g = tape_->grad(leaf);
    if (g.empty()) continue;
    for (std::size_t i = 0; i < g.size(); ++i) flat[param->offset + i] += scale * g[i];
  }
}

}  // namespace bat::nn
