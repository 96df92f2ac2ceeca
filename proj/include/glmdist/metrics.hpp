#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glmdist/types.hpp"

namespace glmd {

// Per-trial estimates (and optional Wald variances) for one estimation
// method under one simulation setting.
struct TrialArchive {
  std::string method;
  Matrix estimates;                      // T x p
  std::optional<Matrix> variances;       // T x p, diag of F_n^-1 at each estimate
  std::vector<bool> converged;           // length T

  std::int64_t trials() const { return estimates.rows(); }
  int p() const { return estimates.cols(); }
  void validate() const;
  double nonconverged_fraction() const;
};

// RMSE_j = sqrt((1/T) sum_t (b_jt - b0_j)^2); non-converged trials included.
std::vector<double> coordinatewise_rmse(const TrialArchive& archive, const BetaVector& beta0);

// CPCI_j: fraction of trials with |b_jt - b0_j| <= 1.96 sqrt(var_tj).
std::vector<double> coverage(const TrialArchive& archive, const BetaVector& beta0);

// Per-coordinate sample standard deviation, divisor T-1.
std::vector<double> empirical_se(const Matrix& estimates);

// P(random positive outscores random negative), ties at 1/2; sort-and-rank,
// O(n log n).
double auc(const std::vector<double>& scores, const std::vector<double>& labels);

struct CoordinateReport {
  double rmse = 0.0;
  std::optional<double> re;    // absent when the baseline RMSE is zero
  std::optional<double> cpci;  // absent when variances are absent
  std::optional<double> rc;    // absent when the baseline CPCI is zero
};

// Ratios against the global-method archive for the same setting.
std::vector<CoordinateReport> relative_report(const TrialArchive& archive,
                                              const TrialArchive& baseline,
                                              const BetaVector& beta0);

// Median of a sequence (mean of the central pair for even length).
double median(std::vector<double> values);

}  // namespace glmd
