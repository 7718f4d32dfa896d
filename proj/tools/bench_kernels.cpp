// Times the serial reference kernels against the OpenMP variants and checks
// that both produce bit-identical output.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bat/kernels.hpp"
#include "bat/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_per_call(const std::function<void()>& fn, int iters) {
  fn();  // warm up
  auto start = Clock::now();
  for (int i = 0; i < iters; ++i) fn();
  std::chrono::duration<double> elapsed = Clock::now() - start;
  return elapsed.count() / iters;
}

std::vector<double> random_matrix(int rows, int cols, bat::Rng& rng) {
  std::vector<double> m(static_cast<std::size_t>(rows) * cols);
  for (double& v : m) v = rng.uniform(-1.0, 1.0);
  return m;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP kernel benchmark"};
  int size = 256, iters = 20, threads = 0;
  app.add_option("--size", size, "square matrix dimension");
  app.add_option("--iters", iters, "timed iterations per kernel");
  app.add_option("--threads", threads, "OpenMP threads (0 = hardware default)");
  CLI11_PARSE(app, argc, argv);

  bat::Rng rng(7);
  auto a = random_matrix(size, size, rng);
  auto b = random_matrix(size, size, rng);
  std::vector<double> c_serial(a.size()), c_parallel(a.size());
  std::vector<double> acc_serial(a.size(), 0.0), acc_parallel(a.size(), 0.0);

  if (threads > 0) bat::kernels::set_threads(threads);
  double flops = 2.0 * size * size * double(size);

  struct Row {
    const char* name;
    double serial;
    double parallel;
    bool match;
  };
  std::vector<Row> rows;

  rows.push_back(
      {"matmul",
       seconds_per_call([&] { bat::kernels::matmul_serial(a.data(), b.data(), c_serial.data(), size, size, size); }, iters),
       seconds_per_call([&] { bat::kernels::matmul_parallel(a.data(), b.data(), c_parallel.data(), size, size, size); }, iters),
       false});
  rows.back().match = bitwise_equal(c_serial, c_parallel);

  rows.push_back(
      {"matmul_acc_nt",
       seconds_per_call([&] { bat::kernels::matmul_acc_nt_serial(a.data(), b.data(), acc_serial.data(), size, size, size); }, iters),
       seconds_per_call([&] { bat::kernels::matmul_acc_nt_parallel(a.data(), b.data(), acc_parallel.data(), size, size, size); }, iters),
       false});
  rows.back().match = bitwise_equal(acc_serial, acc_parallel);

  std::fill(acc_serial.begin(), acc_serial.end(), 0.0);
  std::fill(acc_parallel.begin(), acc_parallel.end(), 0.0);
  rows.push_back(
      {"matmul_acc_tn",
       seconds_per_call([&] { bat::kernels::matmul_acc_tn_serial(a.data(), b.data(), acc_serial.data(), size, size, size); }, iters),
       seconds_per_call([&] { bat::kernels::matmul_acc_tn_parallel(a.data(), b.data(), acc_parallel.data(), size, size, size); }, iters),
       false});
  rows.back().match = bitwise_equal(acc_serial, acc_parallel);

  std::printf("size %d, iters %d, threads %d\n", size, iters,
              bat::kernels::threads());
  std::printf("%-14s %12s %12s %8s %10s %s\n", "kernel", "serial(ms)",
              "parallel(ms)", "speedup", "gflops", "bitwise");
  bool all_match = true;
  for (const auto& row : rows) {
    all_match = all_match && row.match;
    std::printf("%-14s %12.3f %12.3f %8.2f %10.2f %s\n", row.name,
                row.serial * 1e3, row.parallel * 1e3, row.serial / row.parallel,
                flops / row.parallel * 1e-9, row.match ? "ok" : "MISMATCH");
  }
  if (!all_match) {
    std::fprintf(stderr, "error: serial and parallel kernels disagree\n");
    return 1;
  }
  return 0;
}
