#include "bat/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bat/kernels.hpp"

namespace bat::ad {

int numel(const Shape& shape) {
  int n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ")";
  return os.str();
}

namespace {

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              shape_str(a) + " and " + shape_str(b));
}

[[noreturn]] void shape_error1(const char* op, const Shape& a, const char* what) {
  throw std::invalid_argument(std::string(op) + ": " + what + ", got shape " + shape_str(a));
}

}  // namespace

Tape::Node& Tape::at(Tensor t) { return nodes_[static_cast<size_t>(t.id)]; }
const Tape::Node& Tape::at(Tensor t) const { return nodes_[static_cast<size_t>(t.id)]; }

Tensor Tape::push(Shape shape, std::vector<double> value, std::function<void(Tape&)> back) {
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Tensor{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor Tape::leaf(Shape shape, std::vector<double> values) {
  if (static_cast<int>(values.size()) != numel(shape))
    shape_error1("leaf", shape, "value count does not match shape");
  return push(std::move(shape), std::move(values));
}

Tensor Tape::scalar(double v) { return leaf({1}, {v}); }

Tensor Tape::zeros(Shape shape) {
  std::vector<double> v(static_cast<size_t>(numel(shape)), 0.0);
  return push(std::move(shape), std::move(v));
}

const Shape& Tape::shape(Tensor t) const { return at(t).shape; }
const std::vector<double>& Tape::value(Tensor t) const { return at(t).value; }
const std::vector<double>& Tape::grad(Tensor t) const { return at(t).grad; }

double Tape::scalar_value(Tensor t) const {
  const Node& n = at(t);
  if (n.value.size() != 1) shape_error1("scalar_value", n.shape, "expected a scalar");
  return n.value[0];
}

void Tape::clear() { nodes_.clear(); }

Tensor Tape::add(Tensor a, Tensor b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.shape == nb.shape) {
    std::vector<double> out(na.value.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = na.value[i] + nb.value[i];
    int ia = a.id, ib = b.id, self = node_count();
    return push(na.shape, std::move(out), [ia, ib, self](Tape& t) {
      const auto& g = t.nodes_[self].grad;
      auto& ga = t.nodes_[ia].grad;
      auto& gb = t.nodes_[ib].grad;
      for (size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] += g[i];
      }
    });
  }
  // bias broadcast: (m x n) + (n) onto every row
  if (na.shape.size() == 2 && nb.shape.size() == 1 && na.shape[1] == nb.shape[0]) {
    const int m = na.shape[0], n = na.shape[1];
    std::vector<double> out(na.value.size());
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<size_t>(i) * n + j] = na.value[static_cast<size_t>(i) * n + j] + nb.value[j];
    int ia = a.id, ib = b.id, self = node_count();
    return push(na.shape, std::move(out), [ia, ib, self, m, n](Tape& t) {
      const auto& g = t.nodes_[self].grad;
      auto& ga = t.nodes_[ia].grad;
      auto& gb = t.nodes_[ib].grad;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
          ga[static_cast<size_t>(i) * n + j] += g[static_cast<size_t>(i) * n + j];
          gb[j] += g[static_cast<size_t>(i) * n + j];
        }
    });
  }
  shape_error("add", na.shape, nb.shape);
}

Tensor Tape::add_scalar(Tensor a, double c) {
  const Node& na = at(a);
  std::vector<double> out(na.value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = na.value[i] + c;
  int ia = a.id, self = node_count();
  return push(na.shape, std::move(out), [ia, self](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    auto& ga = t.nodes_[ia].grad;
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Tensor Tape::scale(Tensor a, double c) {
  const Node& na = at(a);
  std::vector<double> out(na.value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = na.value[i] * c;
  int ia = a.id, self = node_count();
  return push(na.shape, std::move(out), [ia, self, c](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    auto& ga = t.nodes_[ia].grad;
    for (size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Tensor Tape::smul(Tensor a, Tensor s) {
  const Node& na = at(a);
  const Node& ns = at(s);
  if (numel(ns.shape) != 1) shape_error("smul", na.shape, ns.shape);
  const double sv = ns.value[0];
  std::vector<double> out(na.value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = na.value[i] * sv;
  int ia = a.id, is = s.id, self = node_count();
  return push(na.shape, std::move(out), [ia, is, self](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    const auto& av = t.nodes_[ia].value;
    const double sv2 = t.nodes_[is].value[0];
    auto& ga = t.nodes_[ia].grad;
    auto& gs = t.nodes_[is].grad;
    double acc = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
      ga[i] += sv2 * g[i];
      acc += av[i] * g[i];
    }
    gs[0] += acc;
  });
}

Tensor Tape::mul(Tensor a, Tensor b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.shape != nb.shape) shape_error("mul", na.shape, nb.shape);
  std::vector<double> out(na.value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = na.value[i] * nb.value[i];
  int ia = a.id, ib = b.id, self = node_count();
  return push(na.shape, std::move(out), [ia, ib, self](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    const auto& av = t.nodes_[ia].value;
    const auto& bv = t.nodes_[ib].value;
    auto& ga = t.nodes_[ia].grad;
    auto& gb = t.nodes_[ib].grad;
    for (size_t i = 0; i < g.size(); ++i) {
      ga[i] += bv[i] * g[i];
      gb[i] += av[i] * g[i];
    }
  });
}

Tensor Tape::vmax(Tensor a, Tensor b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.shape != nb.shape) shape_error("vmax", na.shape, nb.shape);
  std::vector<double> out(na.value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::max(na.value[i], nb.value[i]);
  int ia = a.id, ib = b.id, self = node_count();
  return push(na.shape, std::move(out), [ia, ib, self](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    const auto& av = t.nodes_[ia].value;
    const auto& bv = t.nodes_[ib].value;
    auto& ga = t.nodes_[ia].grad;
    auto& gb = t.nodes_[ib].grad;
    for (size_t i = 0; i < g.size(); ++i) {
      if (av[i] >= bv[i]) ga[i] += g[i]; else gb[i] += g[i];
    }
  });
}

Tensor Tape::matmul(Tensor a, Tensor b) {
  const Node& na = at(a);
  const Node& nb = at(b);
  if (na.shape.size() != 2) shape_error("matmul", na.shape, nb.shape);
  const int m = na.shape[0], k = na.shape[1];
  const bool vec = nb.shape.size() == 1;
  const int kb = vec ? nb.shape[0] : (nb.shape.size() == 2 ? nb.shape[0] : -1);
  const int n = vec ? 1 : (nb.shape.size() == 2 ? nb.shape[1] : -1);
  if (kb != k || n < 0) shape_error("matmul", na.shape, nb.shape);
  std::vector<double> out(static_cast<size_t>(m) * n);
  kernels::matmul(na.value.data(), nb.value.data(), out.data(), m, k, n);
  Shape out_shape = vec ? Shape{m} : Shape{m, n};
  int ia = a.id, ib = b.id, self = node_count();
  return push(std::move(out_shape), std::move(out), [ia, ib, self, m, k, n](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    kernels::matmul_acc_nt(g.data(), t.nodes_[ib].value.data(), t.nodes_[ia].grad.data(), m, k, n);
    kernels::matmul_acc_tn(t.nodes_[ia].value.data(), g.data(), t.nodes_[ib].grad.data(), m, k, n);
  });
}

Tensor Tape::unary(const Tensor& a, const char* /*op*/,
                   const std::function<double(double)>& fwd,
                   const std::function<double(double, double)>& dfwd) {
  const Node& na = at(a);
  std::vector<double> out(na.value.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(na.value[i]);
  int ia = a.id, self = node_count();
  return push(na.shape, std::move(out), [ia, self, dfwd](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    const auto& xv = t.nodes_[ia].value;
    const auto& yv = t.nodes_[self].value;
    auto& ga = t.nodes_[ia].grad;
    for (size_t i = 0; i < g.size(); ++i) ga[i] += dfwd(xv[i], yv[i]) * g[i];
  });
}

namespace {
double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Tensor Tape::sigmoid(Tensor a) {
  return unary(a, "sigmoid", stable_sigmoid,
               [](double, double y) { return y * (1.0 - y); });
}

Tensor Tape::tanh(Tensor a) {
  return unary(a, "tanh", [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Tensor Tape::exp(Tensor a) {
  return unary(a, "exp", [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Tensor Tape::log(Tensor a) {
  return unary(a, "log", [](double x) { return std::log(std::max(x, 1e-300)); },
               [](double x, double) { return 1.0 / std::max(x, 1e-300); });
}

Tensor Tape::sin(Tensor a) {
  return unary(a, "sin", [](double x) { return std::sin(x); },
               [](double x, double) { return std::cos(x); });
}

Tensor Tape::cos(Tensor a) {
  return unary(a, "cos", [](double x) { return std::cos(x); },
               [](double x, double) { return -std::sin(x); });
}

Tensor Tape::softplus(Tensor a) {
  return unary(a, "softplus",
               [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); },
               [](double x, double) { return stable_sigmoid(x); });
}

Tensor Tape::leaky_relu(Tensor a, double slope) {
  return unary(a, "leaky_relu",
               [slope](double x) { return x > 0.0 ? x : slope * x; },
               [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Tensor Tape::softmax(Tensor a) {
  const Node& na = at(a);
  const size_t rank = na.shape.size();
  if (rank != 1 && rank != 2) shape_error1("softmax", na.shape, "expected rank 1 or 2");
  const int rows = rank == 2 ? na.shape[0] : 1;
  const int cols = rank == 2 ? na.shape[1] : na.shape[0];
  std::vector<double> out(na.value.size());
  for (int r = 0; r < rows; ++r) {
    const double* x = na.value.data() + static_cast<size_t>(r) * cols;
    double* y = out.data() + static_cast<size_t>(r) * cols;
    double mx = x[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    double sum = 0.0;
    for (int j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      sum += y[j];
    }
    for (int j = 0; j < cols; ++j) y[j] /= sum;
  }
  int ia = a.id, self = node_count();
  return push(na.shape, std::move(out), [ia, self, rows, cols](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    const auto& yv = t.nodes_[self].value;
    auto& ga = t.nodes_[ia].grad;
    for (int r = 0; r < rows; ++r) {
      const double* gr = g.data() + static_cast<size_t>(r) * cols;
      const double* yr = yv.data() + static_cast<size_t>(r) * cols;
      double dot = 0.0;
      for (int j = 0; j < cols; ++j) dot += gr[j] * yr[j];
      double* gar = ga.data() + static_cast<size_t>(r) * cols;
      for (int j = 0; j < cols; ++j) gar[j] += yr[j] * (gr[j] - dot);
    }
  });
}

Tensor Tape::concat(const std::vector<Tensor>& parts, int axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const Shape& first = at(parts[0]).shape;
  const size_t rank = first.size();
  if (axis < 0 || static_cast<size_t>(axis) >= rank)
    shape_error1("concat", first, "axis out of range");

  if (rank == 1) {
    int total = 0;
    for (Tensor p : parts) {
      if (at(p).shape.size() != 1) shape_error("concat", first, at(p).shape);
      total += at(p).shape[0];
    }
    std::vector<double> out;
    out.reserve(static_cast<size_t>(total));
    std::vector<int> ids, offsets, lens;
    int off = 0;
    for (Tensor p : parts) {
      const auto& v = at(p).value;
      out.insert(out.end(), v.begin(), v.end());
      ids.push_back(p.id);
      offsets.push_back(off);
      lens.push_back(static_cast<int>(v.size()));
      off += static_cast<int>(v.size());
    }
    int self = node_count();
    return push({total}, std::move(out), [ids, offsets, lens, self](Tape& t) {
      const auto& g = t.nodes_[self].grad;
      for (size_t p = 0; p < ids.size(); ++p) {
        auto& gp = t.nodes_[ids[p]].grad;
        for (int i = 0; i < lens[p]; ++i) gp[i] += g[offsets[p] + i];
      }
    });
  }

  // rank 2
  int join = 0;
  const int other = axis == 0 ? first[1] : first[0];
  for (Tensor p : parts) {
    const Shape& s = at(p).shape;
    if (s.size() != 2 || (axis == 0 ? s[1] : s[0]) != other)
      shape_error("concat", first, s);
    join += s[axis];
  }
  const int rows = axis == 0 ? join : other;
  const int cols = axis == 0 ? other : join;
  std::vector<double> out(static_cast<size_t>(rows) * cols);
  std::vector<int> ids, starts, widths;
  int start = 0;
  for (Tensor p : parts) {
    const Node& np = at(p);
    const int w = np.shape[axis];
    if (axis == 0) {
      std::copy(np.value.begin(), np.value.end(),
                out.begin() + static_cast<size_t>(start) * cols);
    } else {
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < w; ++j)
          out[static_cast<size_t>(r) * cols + start + j] =
              np.value[static_cast<size_t>(r) * w + j];
    }
    ids.push_back(p.id);
    starts.push_back(start);
    widths.push_back(w);
    start += w;
  }
  int self = node_count();
  const int ax = axis;
  return push({rows, cols}, std::move(out), [ids, starts, widths, self, ax, rows, cols](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    for (size_t p = 0; p < ids.size(); ++p) {
      auto& gp = t.nodes_[ids[p]].grad;
      const int w = widths[p];
      if (ax == 0) {
        for (int i = 0; i < w * cols; ++i)
          gp[i] += g[static_cast<size_t>(starts[p]) * cols + i];
      } else {
        for (int r = 0; r < rows; ++r)
          for (int j = 0; j < w; ++j)
            gp[static_cast<size_t>(r) * w + j] +=
                g[static_cast<size_t>(r) * cols + starts[p] + j];
      }
    }
  });
}

Tensor Tape::slice(Tensor a, int offset, int len) {
  const Node& na = at(a);
  if (na.shape.size() != 1) shape_error1("slice", na.shape, "expected rank 1");
  if (offset < 0 || len < 1 || offset + len > na.shape[0])
    shape_error1("slice", na.shape, "range out of bounds");
  std::vector<double> out(na.value.begin() + offset, na.value.begin() + offset + len);
  int ia = a.id, self = node_count();
  return push({len}, std::move(out), [ia, self, offset, len](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    auto& ga = t.nodes_[ia].grad;
    for (int i = 0; i < len; ++i) ga[offset + i] += g[i];
  });
}

Tensor Tape::stack_rows(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: no inputs");
  const Shape& first = at(rows[0]).shape;
  if (first.size() != 1) shape_error1("stack_rows", first, "expected rank 1 rows");
  const int n = first[0];
  std::vector<double> out;
  out.reserve(rows.size() * static_cast<size_t>(n));
  std::vector<int> ids;
  for (Tensor r : rows) {
    if (at(r).shape != first) shape_error("stack_rows", first, at(r).shape);
    const auto& v = at(r).value;
    out.insert(out.end(), v.begin(), v.end());
    ids.push_back(r.id);
  }
  int self = node_count();
  return push({static_cast<int>(rows.size()), n}, std::move(out), [ids, self, n](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    for (size_t r = 0; r < ids.size(); ++r) {
      auto& gr = t.nodes_[ids[r]].grad;
      for (int j = 0; j < n; ++j) gr[j] += g[r * static_cast<size_t>(n) + j];
    }
  });
}

Tensor Tape::reshape(Tensor a, Shape shape) {
  const Node& na = at(a);
  if (numel(shape) != numel(na.shape)) shape_error("reshape", na.shape, shape);
  std::vector<double> out = na.value;
  int ia = a.id, self = node_count();
  return push(std::move(shape), std::move(out), [ia, self](Tape& t) {
    const auto& g = t.nodes_[self].grad;
    auto& ga = t.nodes_[ia].grad;
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

Tensor Tape::reduce_sum(Tensor a) {
  const Node& na = at(a);
  double s = 0.0;
  for (double v : na.value) s += v;
  int ia = a.id, self = node_count();
  return push({1}, {s}, [ia, self](Tape& t) {
    const double g = t.nodes_[self].grad[0];
    auto& ga = t.nodes_[ia].grad;
    for (double& v : ga) v += g;
  });
}

Tensor Tape::reduce_max(Tensor a) {
  const Node& na = at(a);
  if (na.value.empty()) shape_error1("reduce_max", na.shape, "empty input");
  size_t arg = 0;
  for (size_t i = 1; i < na.value.size(); ++i)
    if (na.value[i] > na.value[arg]) arg = i;
  int ia = a.id, self = node_count();
  return push({1}, {na.value[arg]}, [ia, self, arg](Tape& t) {
    t.nodes_[ia].grad[arg] += t.nodes_[self].grad[0];
  });
}

void Tape::backward(Tensor loss) {
  if (loss.tape != this || loss.id < 0 || loss.id >= node_count())
    throw std::invalid_argument("backward: loss does not belong to this tape");
  if (numel(at(loss).shape) != 1)
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(at(loss).shape));
  for (int i = 0; i <= loss.id; ++i)
    nodes_[static_cast<size_t>(i)].grad.assign(nodes_[static_cast<size_t>(i)].value.size(), 0.0);
  nodes_[static_cast<size_t>(loss.id)].grad[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    auto& n = nodes_[static_cast<size_t>(i)];
    if (n.back) n.back(*this);
  }
}

double grad_check(const std::function<Tensor(Tape&, Tensor)>& f, const Shape& shape,
                  const std::vector<double>& x, double eps) {
  auto eval = [&](const std::vector<double>& xv) {
    Tape t;
    Tensor xt = t.leaf(shape, xv);
    Tensor y = f(t, xt);
    if (numel(t.shape(y)) != 1)
      throw std::invalid_argument("grad_check: f must be scalar-valued");
    const double v = t.value(y)[0];
    if (!std::isfinite(v)) throw std::runtime_error("grad_check: non-finite output");
    return v;
  };

  Tape t;
  Tensor xt = t.leaf(shape, x);
  Tensor y = f(t, xt);
  if (numel(t.shape(y)) != 1)
    throw std::invalid_argument("grad_check: f must be scalar-valued");
  if (!std::isfinite(t.value(y)[0]))
    throw std::runtime_error("grad_check: non-finite output");
  t.backward(y);
  const std::vector<double> analytic = t.grad(xt);

  double worst = 0.0;
  std::vector<double> xp = x;
  for (size_t i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + eps;
    const double up = eval(xp);
    xp[i] = x[i] - eps;
    const double um = eval(xp);
    xp[i] = x[i];
    const double numeric = (up - um) / (2.0 * eps);
    if (!std::isfinite(numeric)) throw std::runtime_error("grad_check: non-finite difference");
    const double denom = std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

}  // namespace bat::ad
