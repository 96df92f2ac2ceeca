#include "glmdist/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace glmd {

void TrialArchive::validate() const {
  if (estimates.rows() < 1) throw ArgumentError("archive must contain at least one trial");
  if (static_cast<std::int64_t>(converged.size()) != estimates.rows())
    throw ArgumentError("converged flags do not match trial count");
  if (variances) {
    if (variances->rows() != estimates.rows() || variances->cols() != estimates.cols())
      throw ArgumentError("variance matrix shape does not match estimates");
    for (double v : variances->data())
      if (!(v > 0.0)) throw ArgumentError("variances must be strictly positive");
  }
}

double TrialArchive::nonconverged_fraction() const {
  if (converged.empty()) return 0.0;
  std::int64_t bad = 0;
  for (bool c : converged)
    if (!c) ++bad;
  return static_cast<double>(bad) / static_cast<double>(converged.size());
}

std::vector<double> coordinatewise_rmse(const TrialArchive& archive, const BetaVector& beta0) {
  archive.validate();
  const std::int64_t t_count = archive.trials();
  const int p = archive.p();
  if (static_cast<int>(beta0.size()) != p) throw ArgumentError("beta0 length mismatch");
  std::vector<double> rmse(p, 0.0);
  for (std::int64_t t = 0; t < t_count; ++t) {
    auto row = archive.estimates.row(t);
    for (int j = 0; j < p; ++j) {
      double d = row[j] - beta0[j];
      rmse[j] += d * d;
    }
  }
  for (int j = 0; j < p; ++j) rmse[j] = std::sqrt(rmse[j] / static_cast<double>(t_count));
  return rmse;
}

std::vector<double> coverage(const TrialArchive& archive, const BetaVector& beta0) {
  archive.validate();
  if (!archive.variances) throw ArgumentError("coverage requires variances");
  const std::int64_t t_count = archive.trials();
  const int p = archive.p();
  if (static_cast<int>(beta0.size()) != p) throw ArgumentError("beta0 length mismatch");
  std::vector<double> hits(p, 0.0);
  for (std::int64_t t = 0; t < t_count; ++t) {
    auto est = archive.estimates.row(t);
    auto var = archive.variances->row(t);
    for (int j = 0; j < p; ++j)
      if (std::fabs(est[j] - beta0[j]) <= 1.96 * std::sqrt(var[j])) hits[j] += 1.0;
  }
  for (int j = 0; j < p; ++j) hits[j] /= static_cast<double>(t_count);
  return hits;
}

std::vector<double> empirical_se(const Matrix& estimates) {
  const std::int64_t t_count = estimates.rows();
  const int p = estimates.cols();
  if (t_count < 2) throw ArgumentError("empirical_se requires at least two trials");
  std::vector<double> mean(p, 0.0);
  for (std::int64_t t = 0; t < t_count; ++t) {
    auto row = estimates.row(t);
    for (int j = 0; j < p; ++j) mean[j] += row[j];
  }
  for (int j = 0; j < p; ++j) mean[j] /= static_cast<double>(t_count);
  std::vector<double> se(p, 0.0);
  for (std::int64_t t = 0; t < t_count; ++t) {
    auto row = estimates.row(t);
    for (int j = 0; j < p; ++j) {
      double d = row[j] - mean[j];
      se[j] += d * d;
    }
  }
  for (int j = 0; j < p; ++j) se[j] = std::sqrt(se[j] / static_cast<double>(t_count - 1));
  return se;
}

double auc(const std::vector<double>& scores, const std::vector<double>& labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw ArgumentError("auc: scores and labels must be non-empty and equal length");
  std::int64_t n_pos = 0, n_neg = 0;
  for (double l : labels) {
    if (l == 1.0)
      ++n_pos;
    else if (l == 0.0)
      ++n_neg;
    else
      throw ArgumentError("auc: labels must be 0 or 1");
  }
  if (n_pos == 0 || n_neg == 0) throw ArgumentError("auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank sum of the positives with average ranks over tie groups.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1.0) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<CoordinateReport> relative_report(const TrialArchive& archive,
                                              const TrialArchive& baseline,
                                              const BetaVector& beta0) {
  if (archive.p() != baseline.p()) throw ArgumentError("relative_report: p mismatch");
  const int p = archive.p();
  std::vector<double> rmse = coordinatewise_rmse(archive, beta0);
  std::vector<double> rmse_base = coordinatewise_rmse(baseline, beta0);
  std::vector<double> cpci, cpci_base;
  bool have_cov = archive.variances.has_value() && baseline.variances.has_value();
  if (have_cov) {
    cpci = coverage(archive, beta0);
    cpci_base = coverage(baseline, beta0);
  }
  std::vector<CoordinateReport> out(p);
  for (int j = 0; j < p; ++j) {
    out[j].rmse = rmse[j];
    if (rmse_base[j] > 0.0) out[j].re = rmse[j] / rmse_base[j];
    if (have_cov) {
      out[j].cpci = cpci[j];
      if (cpci_base[j] > 0.0) out[j].rc = cpci[j] / cpci_base[j];
    }
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw ArgumentError("median of empty sequence");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace glmd
