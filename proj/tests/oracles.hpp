// Independent reference implementations used to pin expected values. These
// deliberately avoid the library's own computational paths: plain Gaussian
// elimination instead of Cholesky, finite differences instead of analytic
// derivatives, O(n^2) scans instead of rank tricks.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_gauss(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    if (a[col][col] == 0.0) throw std::runtime_error("singular system in oracle");
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

inline std::vector<std::vector<double>> invert_gauss(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> inv(n, std::vector<double>(n, 0.0));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(n, 0.0);
    e[j] = 1.0;
    auto col = solve_gauss(a, e);
    for (std::size_t i = 0; i < n; ++i) inv[i][j] = col[i];
  }
  return inv;
}

// Count of eigenvalues of symmetric A strictly below x, by Sylvester's law
// on the LDL^T pivots of A - xI (no pivoting; x is perturbed on breakdown).
inline int eigs_below(std::vector<std::vector<double>> a, double x) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) a[i][i] -= x;
  int negatives = 0;
  for (std::size_t col = 0; col < n; ++col) {
    double d = a[col][col];
    if (d == 0.0) d = -1e-300;
    if (d < 0) ++negatives;
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / d;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  return negatives;
}

// k-th smallest eigenvalue (0-based) of symmetric A by bisection on
// eigs_below.
inline double eigenvalue_bisect(const std::vector<std::vector<double>>& a, int k, double lo,
                                double hi, double tol = 1e-12) {
  while (hi - lo > tol * std::max(1.0, std::fabs(hi))) {
    double mid = 0.5 * (lo + hi);
    if (eigs_below(a, mid) > k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Central finite-difference gradient.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    double orig = x[j];
    x[j] = orig + h;
    double up = f(x);
    x[j] = orig - h;
    double down = f(x);
    x[j] = orig;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

// Central finite-difference Jacobian of a vector function.
inline std::vector<std::vector<double>> fd_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-6) {
  const std::size_t p = x.size();
  std::vector<std::vector<double>> jac(p, std::vector<double>(p, 0.0));
  for (std::size_t j = 0; j < p; ++j) {
    double orig = x[j];
    x[j] = orig + h;
    auto up = f(x);
    x[j] = orig - h;
    auto down = f(x);
    x[j] = orig;
    for (std::size_t i = 0; i < p; ++i) jac[i][j] = (up[i] - down[i]) / (2.0 * h);
  }
  return jac;
}

// Pairwise AUC with ties at 1/2, O(n^2).
inline double auc_pairwise(const std::vector<double>& scores, const std::vector<double>& labels) {
  double num = 0.0;
  std::int64_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1.0) {
      ++n_pos;
      continue;
    }
    ++n_neg;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1.0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0.0) continue;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  }
  return num / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// Deterministic mt19937-based helpers for test instances (independent of
// the library's own generator).
inline std::mt19937_64& test_rng(std::uint64_t seed) {
  static thread_local std::mt19937_64 rng;
  rng.seed(seed);
  return rng;
}

inline double std_normal(std::mt19937_64& rng) {
  static std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

}  // namespace oracle
