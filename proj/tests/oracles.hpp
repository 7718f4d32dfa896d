#pragma once

// Independent reference implementations used only by tests. Deliberately
// written with different algorithms than the library under test.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracles {

// Largest eigenvalue of a symmetric n x n matrix by the cyclic Jacobi
// rotation method. O(n^3) per sweep; fine for the small matrices tests use.
inline double jacobi_max_eigenvalue(std::vector<double> a, int n) {
  auto idx = [n](int i, int j) { return static_cast<std::size_t>(i) * n + j; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a[idx(i, j)] * a[idx(i, j)];
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[idx(p, q)]) < 1e-300) continue;
        const double theta = (a[idx(q, q)] - a[idx(p, p)]) / (2.0 * a[idx(p, q)]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[idx(k, p)];
          const double akq = a[idx(k, q)];
          a[idx(k, p)] = c * akp - s * akq;
          a[idx(k, q)] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[idx(p, k)];
          const double aqk = a[idx(q, k)];
          a[idx(p, k)] = c * apk - s * aqk;
          a[idx(q, k)] = s * apk + c * aqk;
        }
      }
  }
  double best = a[0];
  for (int i = 1; i < n; ++i) best = std::max(best, a[idx(i, i)]);
  return best;
}

}  // namespace oracles
