#include "bat/kernels.hpp"

#include <algorithm>
#include <cstring>

namespace bat::kernels {

namespace {
int g_threads = 1;
}

void set_threads(int n) { g_threads = std::max(1, n); }
int threads() { return g_threads; }

void matmul_serial(const double* a, const double* b, double* c, int m, int k, int n) {
  std::memset(c, 0, sizeof(double) * static_cast<size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void matmul_parallel(const double* a, const double* b, double* c, int m, int k, int n) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) ci[j] = 0.0;
    for (int p = 0; p < k; ++p) {
      const double aip = ai[p];
      const double* bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n) {
  if (g_threads > 1 && m > 1) {
    matmul_parallel(a, b, c, m, k, n);
  } else {
    matmul_serial(a, b, c, m, k, n);
  }
}

void matmul_acc_nt_serial(const double* dc, const double* b, double* da, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const double* dci = dc + static_cast<size_t>(i) * n;
    double* dai = da + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double* bp = b + static_cast<size_t>(p) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += dci[j] * bp[j];
      dai[p] += acc;
    }
  }
}

void matmul_acc_nt_parallel(const double* dc, const double* b, double* da, int m, int k, int n) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (int i = 0; i < m; ++i) {
    const double* dci = dc + static_cast<size_t>(i) * n;
    double* dai = da + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double* bp = b + static_cast<size_t>(p) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += dci[j] * bp[j];
      dai[p] += acc;
    }
  }
}

void matmul_acc_nt(const double* dc, const double* b, double* da, int m, int k, int n) {
  if (g_threads > 1 && m > 1) {
    matmul_acc_nt_parallel(dc, b, da, m, k, n);
  } else {
    matmul_acc_nt_serial(dc, b, da, m, k, n);
  }
}

void matmul_acc_tn_serial(const double* a, const double* dc, double* db, int m, int k, int n) {
  for (int p = 0; p < k; ++p) {
    double* dbp = db + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double aip = a[static_cast<size_t>(i) * k + p];
      const double* dci = dc + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) dbp[j] += aip * dci[j];
    }
  }
}

void matmul_acc_tn_parallel(const double* a, const double* dc, double* db, int m, int k, int n) {
#pragma omp parallel for schedule(static) num_threads(g_threads)
  for (int p = 0; p < k; ++p) {
    double* dbp = db + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const double aip = a[static_cast<size_t>(i) * k + p];
      const double* dci = dc + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) dbp[j] += aip * dci[j];
    }
  }
}

void matmul_acc_tn(const double* a, const double* dc, double* db, int m, int k, int n) {
  if (g_threads > 1 && k > 1) {
    matmul_acc_tn_parallel(a, dc, db, m, k, n);
  } else {
    matmul_acc_tn_serial(a, dc, db, m, k, n);
  }
}

}  // namespace bat::kernels
