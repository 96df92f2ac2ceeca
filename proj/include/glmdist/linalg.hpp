#pragma once

#include <utility>
#include <vector>

#include "glmdist/types.hpp"

namespace glmd {

// Symmetric positive (semi)definite matrix, row-major p x p. Construction
// checks symmetry to 1e-12 relative and then symmetrizes exactly; positive
// definiteness itself is established at factorization time.
class SpdMatrix {
 public:
  SpdMatrix() : p_(0) {}
  SpdMatrix(int p, std::vector<double> entries);

  static SpdMatrix identity(int p);

  int dim() const { return p_; }
  double operator()(int i, int j) const { return entries_[static_cast<std::size_t>(i) * p_ + j]; }
  double& operator()(int i, int j) { return entries_[static_cast<std::size_t>(i) * p_ + j]; }
  const std::vector<double>& entries() const { return entries_; }

  SpdMatrix& operator+=(const SpdMatrix& other);

  std::vector<double> multiply(const std::vector<double>& x) const;

 private:
  int p_;
  std::vector<double> entries_;
};

class CholeskyFactor {
 public:
  CholeskyFactor() : p_(0) {}
  int dim() const { return p_; }
  double operator()(int i, int j) const { return lower_[static_cast<std::size_t>(i) * p_ + j]; }
  const std::vector<double>& lower() const { return lower_; }

 private:
  friend CholeskyFactor cholesky(const SpdMatrix&);
  int p_;
  std::vector<double> lower_;
};

// Right-looking Cholesky without pivoting. Throws NotPositiveDefiniteError
// (with the failing pivot index) when a pivot falls at or below
// p * 1e-14 * max(diag).
CholeskyFactor cholesky(const SpdMatrix& a);

// Solve (L L^T) x = b.
std::vector<double> spd_solve(const CholeskyFactor& factor, const std::vector<double>& b);

SpdMatrix spd_inverse(const CholeskyFactor& factor);

// (lambda_min, lambda_max) by inverse/forward power iteration through the
// Cholesky factor, each converged to relative tolerance tol. Start vector is
// all-ones normalized; a deterministic restart cycles through coordinate
// directions if the Rayleigh quotient stagnates away from an eigenvector.
std::pair<double, double> eigen_extremes(const SpdMatrix& a, double tol);

}  // namespace glmd
