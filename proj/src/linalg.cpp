#include "glmdist/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace glmd {

SpdMatrix::SpdMatrix(int p, std::vector<double> entries) : p_(p), entries_(std::move(entries)) {
  if (p < 1 || entries_.size() != static_cast<std::size_t>(p) * p)
    throw ArgumentError("SpdMatrix: entries must be p*p with p >= 1");
  double scale = 0.0;
  for (double x : entries_) {
    if (!std::isfinite(x)) throw DomainError("SpdMatrix: non-finite entry");
    scale = std::max(scale, std::fabs(x));
  }
  for (int i = 0; i < p_; ++i) {
    for (int j = i + 1; j < p_; ++j) {
      double a = (*this)(i, j), b = (*this)(j, i);
      if (std::fabs(a - b) > 1e-12 * std::max(1.0, scale))
        throw ArgumentError("SpdMatrix: input asymmetric beyond 1e-12 relative");
      double s = 0.5 * (a + b);
      (*this)(i, j) = s;
      (*this)(j, i) = s;
    }
  }
}

SpdMatrix SpdMatrix::identity(int p) {
  std::vector<double> e(static_cast<std::size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i) e[static_cast<std::size_t>(i) * p + i] = 1.0;
  return SpdMatrix(p, std::move(e));
}

SpdMatrix& SpdMatrix::operator+=(const SpdMatrix& other) {
  if (other.p_ != p_) throw ArgumentError("SpdMatrix: dimension mismatch in +=");
  for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

std::vector<double> SpdMatrix::multiply(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != p_) throw ArgumentError("SpdMatrix: vector length mismatch");
  std::vector<double> y(p_, 0.0);
  for (int i = 0; i < p_; ++i) {
    double s = 0.0;
    for (int j = 0; j < p_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

CholeskyFactor cholesky(const SpdMatrix& a) {
  const int p = a.dim();
  if (p < 1) throw ArgumentError("cholesky: empty matrix");
  double max_diag = 0.0;
  for (int i = 0; i < p; ++i) max_diag = std::max(max_diag, a(i, i));
  const double pivot_floor = p * 1e-14 * max_diag;

  CholeskyFactor f;
  f.p_ = p;
  f.lower_.assign(static_cast<std::size_t>(p) * p, 0.0);
  auto L = [&](int i, int j) -> double& { return f.lower_[static_cast<std::size_t>(i) * p + j]; };

  for (int j = 0; j < p; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > pivot_floor))
      throw NotPositiveDefiniteError(
          "cholesky: non-positive pivot at index " + std::to_string(j), j);
    double lj = std::sqrt(d);
    L(j, j) = lj;
    for (int i = j + 1; i < p; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / lj;
    }
  }
  return f;
}

std::vector<double> spd_solve(const CholeskyFactor& factor, const std::vector<double>& b) {
  const int p = factor.dim();
  if (static_cast<int>(b.size()) != p) throw ArgumentError("spd_solve: length mismatch");
  std::vector<double> x(b);
  // L y = b
  for (int i = 0; i < p; ++i) {
    double s = x[i];
    for (int k = 0; k < i; ++k) s -= factor(i, k) * x[k];
    x[i] = s / factor(i, i);
  }
  // L^T x = y
  for (int i = p - 1; i >= 0; --i) {
    double s = x[i];
    for (int k = i + 1; k < p; ++k) s -= factor(k, i) * x[k];
    x[i] = s / factor(i, i);
  }
  return x;
}

SpdMatrix spd_inverse(const CholeskyFactor& factor) {
  const int p = factor.dim();
  std::vector<double> inv(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> e(p, 0.0);
  for (int j = 0; j < p; ++j) {
    e[j] = 1.0;
    std::vector<double> col = spd_solve(factor, e);
    e[j] = 0.0;
    for (int i = 0; i < p; ++i) inv[static_cast<std::size_t>(i) * p + j] = col[i];
  }
  // The column solves agree only to roundoff across the diagonal; average.
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      double s = 0.5 * (inv[static_cast<std::size_t>(i) * p + j] +
                        inv[static_cast<std::size_t>(j) * p + i]);
      inv[static_cast<std::size_t>(i) * p + j] = s;
      inv[static_cast<std::size_t>(j) * p + i] = s;
    }
  return SpdMatrix(p, std::move(inv));
}

namespace {

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Power iteration on `apply` (a unit-norm-preserving SPD operator),
// returning the dominant Rayleigh quotient. Restarts from coordinate
// directions when the quotient stagnates while the residual stays large
// (start vector orthogonal to the dominant eigenvector).
template <typename ApplyFn>
double dominant_rayleigh(int p, double tol, ApplyFn&& apply) {
  constexpr int kMaxIter = 10000;
  std::vector<double> v(p, 1.0 / std::sqrt(static_cast<double>(p)));
  std::vector<double> av = apply(v);
  double lambda = 0.0;
  int restarts = 0;
  int stagnant = 0;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    double ray = 0.0;
    for (int i = 0; i < p; ++i) ray += v[i] * av[i];
    double resid = 0.0;
    for (int i = 0; i < p; ++i) {
      double r = av[i] - ray * v[i];
      resid += r * r;
    }
    resid = std::sqrt(resid);
    const double scale = std::max(std::fabs(ray), 1e-300);
    bool settled = std::fabs(ray - lambda) <= tol * scale;
    lambda = ray;
    if (settled) {
      if (resid <= 10.0 * tol * scale * p) return lambda;
      if (++stagnant >= 8) {  // orthogonal start: restart from a coordinate axis
        if (restarts >= p) return lambda;
        v.assign(p, 0.0);
        v[restarts % p] = 1.0;
        ++restarts;
        stagnant = 0;
        av = apply(v);
        continue;
      }
    } else {
      stagnant = 0;
    }
    double an = norm2(av);
    if (an == 0.0) throw ConvergenceError("eigen_extremes: operator annihilated iterate");
    for (int i = 0; i < p; ++i) v[i] = av[i] / an;
    av = apply(v);
  }
  throw ConvergenceError("eigen_extremes: iteration cap exceeded, last value " +
                         std::to_string(lambda));
}

}  // namespace

std::pair<double, double> eigen_extremes(const SpdMatrix& a, double tol) {
  const int p = a.dim();
  if (p == 1) return {a(0, 0), a(0, 0)};
  double lambda_max = dominant_rayleigh(p, tol, [&](const std::vector<double>& v) {
    return a.multiply(v);
  });
  CholeskyFactor f = cholesky(a);
  double inv_dominant = dominant_rayleigh(p, tol, [&](const std::vector<double>& v) {
    return spd_solve(f, v);
  });
  double lambda_min = 1.0 / inv_dominant;
  if (lambda_min > lambda_max) std::swap(lambda_min, lambda_max);
  return {lambda_min, lambda_max};
}

}  // namespace glmd
