#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bat/rng.hpp"
#include "bat/tensor.hpp"

using bat::ad::Shape;
using bat::ad::Tape;
using bat::ad::Tensor;

namespace {

std::vector<double> random_values(bat::Rng& rng, int n, double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("sum gradient is all ones") {
  Tape t;
  Tensor x = t.leaf({4}, {1.0, -2.0, 3.0, 0.5});
  t.backward(t.reduce_sum(x));
  for (double g : t.grad(x)) CHECK(g == 1.0);
}

TEST_CASE("sum of squares gradient is 2x") {
  Tape t;
  const std::vector<double> xv = {1.0, -2.0, 3.0, 0.5};
  Tensor x = t.leaf({4}, xv);
  t.backward(t.reduce_sum(t.mul(x, x)));
  for (size_t i = 0; i < xv.size(); ++i) CHECK(t.grad(x)[i] == doctest::Approx(2.0 * xv[i]).epsilon(1e-15));
}

TEST_CASE("gradients accumulate across fan-out") {
  Tape t;
  Tensor x = t.leaf({2}, {3.0, -1.0});
  Tensor y = t.add(t.mul(x, x), t.scale(x, 4.0));  // x^2 + 4x -> dx = 2x + 4
  t.backward(t.reduce_sum(y));
  CHECK(t.grad(x)[0] == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(t.grad(x)[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("backward is deterministic: identical tapes give bit-identical gradients") {
  auto run = [](std::vector<double>& out) {
    Tape t;
    Tensor w = t.leaf({3, 3}, {0.1, -0.2, 0.3, 0.4, 0.5, -0.6, 0.7, 0.8, 0.9});
    Tensor x = t.leaf({3}, {1.0, 2.0, -3.0});
    Tensor y = t.tanh(t.matmul(w, x));
    t.backward(t.reduce_sum(t.mul(y, y)));
    out = t.grad(w);
  };
  std::vector<double> g1, g2;
  run(g1);
  run(g2);
  REQUIRE(g1.size() == g2.size());
  for (size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("every primitive passes finite differences at 100 random points") {
  bat::Rng rng(42);
  struct Probe {
    const char* name;
    std::function<Tensor(Tape&, Tensor)> f;
    double lo, hi;
  };
  const std::vector<Probe> probes = {
      {"add", [](Tape& t, Tensor x) {
         Tensor y = t.leaf({6}, {0.3, -0.4, 0.5, 1.1, -1.2, 0.7});
         return t.reduce_sum(t.mul(t.add(x, y), t.add(x, y)));
       }, -2.0, 2.0},
      {"add_scalar", [](Tape& t, Tensor x) {
         return t.reduce_sum(t.mul(t.add_scalar(x, 1.7), x));
       }, -2.0, 2.0},
      {"scale", [](Tape& t, Tensor x) {
         return t.reduce_sum(t.mul(t.scale(x, -2.5), x));
       }, -2.0, 2.0},
      {"mul", [](Tape& t, Tensor x) {
         Tensor y = t.leaf({6}, {1.3, 0.4, -0.5, 2.1, -0.2, 0.9});
         return t.reduce_sum(t.mul(t.mul(x, y), x));
       }, -2.0, 2.0},
      {"sigmoid", [](Tape& t, Tensor x) { return t.reduce_sum(t.sigmoid(x)); }, -4.0, 4.0},
      {"tanh", [](Tape& t, Tensor x) { return t.reduce_sum(t.tanh(x)); }, -4.0, 4.0},
      {"exp", [](Tape& t, Tensor x) { return t.reduce_sum(t.exp(x)); }, -2.0, 2.0},
      {"log", [](Tape& t, Tensor x) { return t.reduce_sum(t.log(x)); }, 0.2, 4.0},
      {"sin", [](Tape& t, Tensor x) { return t.reduce_sum(t.sin(x)); }, -3.0, 3.0},
      {"cos", [](Tape& t, Tensor x) { return t.reduce_sum(t.cos(x)); }, -3.0, 3.0},
      {"softplus", [](Tape& t, Tensor x) { return t.reduce_sum(t.softplus(x)); }, -4.0, 4.0},
      {"leaky_relu", [](Tape& t, Tensor x) {
         return t.reduce_sum(t.mul(t.leaky_relu(x, 0.1), x));
       }, -2.0, 2.0},
      {"softmax", [](Tape& t, Tensor x) {
         Tensor w = t.leaf({6}, {0.9, -0.3, 0.2, 1.4, -0.8, 0.5});
         return t.reduce_sum(t.mul(t.softmax(x), w));
       }, -3.0, 3.0},
      {"smul", [](Tape& t, Tensor x) {
         Tensor s = t.reduce_sum(x);
         return t.reduce_sum(t.smul(x, s));
       }, -2.0, 2.0},
      {"vmax", [](Tape& t, Tensor x) {
         Tensor y = t.leaf({6}, {0.35, -0.45, 0.55, 1.15, -1.25, 0.75});
         return t.reduce_sum(t.mul(t.vmax(x, y), x));
       }, -2.0, 2.0},
      {"slice_concat", [](Tape& t, Tensor x) {
         Tensor left = t.slice(x, 0, 3);
         Tensor right = t.slice(x, 3, 3);
         Tensor joined = t.concat({t.mul(left, right), t.add(left, right)});
         return t.reduce_sum(t.mul(joined, joined));
       }, -2.0, 2.0},
      {"reduce_max", [](Tape& t, Tensor x) {
         return t.mul(t.reduce_max(x), t.reduce_sum(x));
       }, -2.0, 2.0},
  };

  const int points_per_probe = 1 + 100 / static_cast<int>(probes.size());
  for (const Probe& probe : probes) {
    double worst = 0.0;
    for (int rep = 0; rep < points_per_probe; ++rep) {
      auto x = random_values(rng, 6, probe.lo, probe.hi);
      worst = std::max(worst, bat::ad::grad_check(probe.f, {6}, x, 1e-5));
    }
    INFO(probe.name);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("matmul gradients pass finite differences in both operands") {
  bat::Rng rng(43);
  const std::vector<double> bv = random_values(rng, 12);
  auto left = [&bv](Tape& t, Tensor a) {
    Tensor b = t.leaf({4, 3}, bv);
    Tensor c = t.matmul(a, b);
    return t.reduce_sum(t.mul(c, c));
  };
  CHECK(bat::ad::grad_check(left, {2, 4}, random_values(rng, 8), 1e-5) < 1e-4);

  const std::vector<double> av = random_values(rng, 8);
  auto right = [&av](Tape& t, Tensor b) {
    Tensor a = t.leaf({2, 4}, av);
    Tensor c = t.matmul(a, b);
    return t.reduce_sum(t.mul(c, c));
  };
  CHECK(bat::ad::grad_check(right, {4, 3}, random_values(rng, 12), 1e-5) < 1e-4);

  auto vec = [&av](Tape& t, Tensor x) {
    Tensor a = t.leaf({2, 4}, av);
    Tensor c = t.matmul(a, x);
    return t.reduce_sum(t.mul(c, c));
  };
  CHECK(bat::ad::grad_check(vec, {4}, random_values(rng, 4), 1e-5) < 1e-4);
}

TEST_CASE("bias broadcast add sums its gradient over rows") {
  Tape t;
  Tensor m = t.leaf({2, 3}, {1.0, 2.0, 3.0, 4.0, 5.0, 6.0});
  Tensor b = t.leaf({3}, {10.0, 20.0, 30.0});
  Tensor y = t.add(m, b);
  CHECK(t.value(y)[0] == 11.0);
  CHECK(t.value(y)[5] == 36.0);
  t.backward(t.reduce_sum(y));
  for (double g : t.grad(b)) CHECK(g == 2.0);
  for (double g : t.grad(m)) CHECK(g == 1.0);
}

TEST_CASE("softmax rows are simplex points") {
  Tape t;
  Tensor x = t.leaf({2, 3}, {1.0, 2.0, 3.0, -1.0, 0.0, 1.0});
  Tensor y = t.softmax(x);
  const auto& v = t.value(y);
  CHECK(v[0] + v[1] + v[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[3] + v[4] + v[5] == doctest::Approx(1.0).epsilon(1e-12));
  for (double p : v) CHECK(p > 0.0);
  CHECK(v[2] > v[1]);
  CHECK(v[1] > v[0]);
}

TEST_CASE("softmax is shift invariant and handles large logits") {
  Tape t;
  Tensor a = t.softmax(t.leaf({3}, {1000.0, 1001.0, 1002.0}));
  Tensor b = t.softmax(t.leaf({3}, {0.0, 1.0, 2.0}));
  for (int i = 0; i < 3; ++i)
    CHECK(t.value(a)[i] == doctest::Approx(t.value(b)[i]).epsilon(1e-12));
}

TEST_CASE("vmax ties route the gradient to the first operand") {
  Tape t;
  Tensor a = t.leaf({2}, {1.0, 5.0});
  Tensor b = t.leaf({2}, {1.0, 2.0});
  t.backward(t.reduce_sum(t.vmax(a, b)));
  CHECK(t.grad(a)[0] == 1.0);
  CHECK(t.grad(b)[0] == 0.0);
  CHECK(t.grad(a)[1] == 1.0);
  CHECK(t.grad(b)[1] == 0.0);
}

TEST_CASE("reduce_max routes the gradient to the first argmax") {
  Tape t;
  Tensor x = t.leaf({4}, {1.0, 7.0, 7.0, 2.0});
  Tensor y = t.reduce_max(x);
  CHECK(t.scalar_value(y) == 7.0);
  t.backward(y);
  CHECK(t.grad(x)[0] == 0.0);
  CHECK(t.grad(x)[1] == 1.0);
  CHECK(t.grad(x)[2] == 0.0);
  CHECK(t.grad(x)[3] == 0.0);
}

TEST_CASE("log clamps its input away from zero") {
  Tape t;
  Tensor x = t.leaf({2}, {0.0, 1.0});
  Tensor y = t.log(x);
  CHECK(std::isfinite(t.value(y)[0]));
  CHECK(t.value(y)[1] == 0.0);
  t.backward(t.reduce_sum(y));
  CHECK(std::isfinite(t.grad(x)[0]));
}

TEST_CASE("concat joins rank-2 tensors along both axes") {
  Tape t;
  Tensor a = t.leaf({2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor b = t.leaf({1, 2}, {5.0, 6.0});
  Tensor rows = t.concat({a, b}, 0);
  CHECK(t.shape(rows) == Shape{3, 2});
  CHECK(t.value(rows)[4] == 5.0);

  Tensor c = t.leaf({2, 1}, {7.0, 8.0});
  Tensor cols = t.concat({a, c}, 1);
  CHECK(t.shape(cols) == Shape{2, 3});
  CHECK(t.value(cols)[2] == 7.0);
  CHECK(t.value(cols)[5] == 8.0);

  t.backward(t.reduce_sum(t.mul(cols, cols)));
  CHECK(t.grad(c)[0] == doctest::Approx(14.0).epsilon(1e-15));
}

TEST_CASE("stack_rows builds a matrix from rank-1 rows") {
  Tape t;
  Tensor r0 = t.leaf({3}, {1.0, 2.0, 3.0});
  Tensor r1 = t.leaf({3}, {4.0, 5.0, 6.0});
  Tensor m = t.stack_rows({r0, r1});
  CHECK(t.shape(m) == Shape{2, 3});
  t.backward(t.reduce_sum(t.mul(m, m)));
  CHECK(t.grad(r1)[2] == doctest::Approx(12.0).epsilon(1e-15));
}

TEST_CASE("shape violations throw invalid_argument") {
  Tape t;
  Tensor a = t.leaf({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor b = t.leaf({2, 2}, {1, 2, 3, 4});
  Tensor v = t.leaf({3}, {1, 2, 3});
  CHECK_THROWS_AS(t.add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.mul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.matmul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(t.matmul(v, v), std::invalid_argument);
  CHECK_THROWS_AS(t.slice(v, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(t.slice(a, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(t.concat({a, v}, 0), std::invalid_argument);
  CHECK_THROWS_AS(t.stack_rows({v, a}), std::invalid_argument);
  CHECK_THROWS_AS(t.leaf({2}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(t.backward(a), std::invalid_argument);
}

TEST_CASE("grad_check rejects non-finite functions") {
  auto f = [](Tape& t, Tensor x) {
    return t.smul(t.scalar(std::numeric_limits<double>::quiet_NaN()), t.reduce_sum(x));
  };
  CHECK_THROWS_AS(bat::ad::grad_check(f, {2}, {1.0, 2.0}, 1e-5), std::runtime_error);
}

TEST_CASE("lstm-style composite gradient survives a deep tape") {
  bat::Rng rng(44);
  const auto wv = random_values(rng, 16, -0.5, 0.5);
  auto f = [&wv](Tape& t, Tensor x) {
    Tensor w = t.leaf({4, 4}, wv);
    Tensor h = t.zeros({4});
    for (int step = 0; step < 5; ++step) {
      Tensor z = t.matmul(w, t.add(h, x));
      Tensor gate = t.sigmoid(t.slice(z, 0, 2));
      Tensor cand = t.tanh(t.slice(z, 2, 2));
      h = t.concat({t.mul(gate, cand), t.slice(h, 2, 2)});
    }
    return t.reduce_sum(t.mul(h, h));
  };
  CHECK(bat::ad::grad_check(f, {4}, random_values(rng, 4, -1.0, 1.0), 1e-5) < 1e-4);
}
