#include "glmdist/casestudy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "glmdist/datagen.hpp"
#include "glmdist/metrics.hpp"

namespace glmd {

LabeledData read_labeled_csv(const std::string& path, int expected_features) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path);
  std::vector<double> labels;
  std::vector<double> values;
  int n_features = expected_features;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const char* s = line.c_str();
    char* end = nullptr;
    double label = std::strtod(s, &end);
    if (end == s)
      throw IoError("line " + std::to_string(lineno) + ": cannot parse label");
    if (!std::isfinite(label))
      throw IoError("line " + std::to_string(lineno) + ": non-finite label");
    int count = 0;
    s = end;
    while (*s == ',') {
      ++s;
      double v = std::strtod(s, &end);
      if (end == s)
        throw IoError("line " + std::to_string(lineno) + ": cannot parse feature " +
                      std::to_string(count + 1));
      if (!std::isfinite(v))
        throw IoError("line " + std::to_string(lineno) + ": non-finite feature value");
      values.push_back(v);
      ++count;
      s = end;
    }
    if (*s != '\0' && *s != '\r')
      throw IoError("line " + std::to_string(lineno) + ": trailing garbage");
    if (n_features < 0) n_features = count;
    if (count != n_features)
      throw IoError("line " + std::to_string(lineno) + ": expected " +
                    std::to_string(n_features) + " features, found " + std::to_string(count));
    labels.push_back(label);
  }
  if (labels.empty()) throw IoError("input file has no records: " + path);
  LabeledData data;
  data.features = Matrix(static_cast<std::int64_t>(labels.size()), n_features, std::move(values));
  data.labels = std::move(labels);
  return data;
}

void CaseStudyConfig::validate() const {
  if (input_path.empty()) throw ConfigError("casestudy: input path required");
  if (k < 1) throw ConfigError("casestudy: k must be >= 1");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw ConfigError("casestudy: holdout fraction must be in (0,1)");
  if (trials < 1) throw ConfigError("casestudy: trials must be >= 1");
  if (model == FamilyKind::poisson) throw ConfigError("casestudy: response is binary");
  fit.validate();
}

int ExpansionPlan::columns() const {
  int cols = 1 + static_cast<int>(linear_idx.size());
  for (const auto& spec : specs) cols += spec.basis_count();
  return cols;
}

void ExpansionPlan::expand_row(std::span<const double> features, double* out) const {
  int col = 0;
  out[col++] = 1.0;
  for (int idx : linear_idx) out[col++] = features[idx];
  for (std::size_t b = 0; b < expanded_idx.size(); ++b) {
    std::vector<double> basis = bspline_basis(features[expanded_idx[b]], specs[b]);
    for (double v : basis) out[col++] = v;
  }
}

ExpansionPlan build_expansion_plan(const LabeledData& data, const std::vector<bool>& in_train,
                                   const std::vector<int>& linear_features_1based) {
  const int m = data.features.cols();
  ExpansionPlan plan;
  std::vector<bool> is_linear(m, false);
  for (int idx1 : linear_features_1based) {
    if (idx1 < 1 || idx1 > m)
      throw ConfigError("linear feature index " + std::to_string(idx1) + " out of range");
    is_linear[idx1 - 1] = true;
    plan.linear_idx.push_back(idx1 - 1);
  }
  std::sort(plan.linear_idx.begin(), plan.linear_idx.end());

  for (int j = 0; j < m; ++j) {
    if (is_linear[j]) continue;
    std::vector<double> column;
    column.reserve(data.features.rows());
    for (std::int64_t i = 0; i < data.features.rows(); ++i)
      if (in_train[static_cast<std::size_t>(i)]) column.push_back(data.features(i, j));
    if (column.size() < 4)
      throw DegenerateKnotsError("too few training rows to place knots for feature " +
                                 std::to_string(j + 1));
    SplineSpec spec;
    spec.order = 4;
    spec.interior_knots = quantile_knots(column);
    auto [lo, hi] = std::minmax_element(column.begin(), column.end());
    spec.low = *lo;
    spec.high = *hi;
    spec.drop_first = true;
    spec.validate();
    plan.expanded_idx.push_back(j);
    plan.specs.push_back(std::move(spec));
  }
  return plan;
}

CaseStudyReport casestudy_run(const CaseStudyConfig& config) {
  config.validate();
  LabeledData data = read_labeled_csv(config.input_path);
  const std::int64_t n = data.features.rows();
  const GlmFamily family = GlmFamily::make(config.model);
  family.validate_response(data.labels);

  CaseStudyReport report;
  report.rows = n;

  Matrix estimates;  // trials x p, filled as trials complete
  for (int trial = 0; trial < config.trials; ++trial) {
    // Seeded split: each row independently assigned to the holdout with the
    // configured probability.
    SplitMix64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(trial)));
    std::vector<bool> in_train(static_cast<std::size_t>(n));
    std::int64_t train_count = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      bool train = rng.next_uniform() >= config.holdout_fraction;
      in_train[static_cast<std::size_t>(i)] = train;
      if (train) ++train_count;
    }
    if (train_count == 0 || train_count == n)
      throw ConfigError("degenerate train/holdout split");

    ExpansionPlan plan = build_expansion_plan(data, in_train, config.linear_features);
    const int p = plan.columns();
    report.design_columns = p;

    // Expand per shard: contiguous blocks of the training rows.
    std::vector<std::int64_t> train_rows;
    train_rows.reserve(train_count);
    for (std::int64_t i = 0; i < n; ++i)
      if (in_train[static_cast<std::size_t>(i)]) train_rows.push_back(i);
    auto sizes = shard_sizes(train_count, config.k);
    std::vector<Shard> shards;
    shards.reserve(config.k);
    std::int64_t offset = 0;
    for (int w = 0; w < config.k; ++w) {
      Shard s;
      s.worker_id = w;
      s.data.design = Matrix(sizes[w], p);
      s.data.response.resize(sizes[w]);
      for (std::int64_t i = 0; i < sizes[w]; ++i) {
        std::int64_t row = train_rows[offset + i];
        plan.expand_row(data.features.row(row), s.data.design.row(i).data());
        s.data.response[i] = data.labels[static_cast<std::size_t>(row)];
      }
      offset += sizes[w];
      shards.push_back(std::move(s));
    }

    TransportSpec transport;  // in-process
    DistributedEstimate est = run_distributed(family, shards, config.fit, config.method, transport);

    if (estimates.rows() == 0) estimates = Matrix(config.trials, p);
    auto dst = estimates.row(trial);
    for (int j = 0; j < p; ++j) dst[j] = est.estimate[j];
    report.last_estimate = est.estimate;

    // Holdout AUC on the linear predictor.
    std::vector<double> scores, labels;
    std::vector<double> design_row(p);
    for (std::int64_t i = 0; i < n; ++i) {
      if (in_train[static_cast<std::size_t>(i)]) continue;
      plan.expand_row(data.features.row(i), design_row.data());
      double eta = 0.0;
      for (int j = 0; j < p; ++j) eta += design_row[j] * est.estimate[j];
      scores.push_back(eta);
      labels.push_back(data.labels[static_cast<std::size_t>(i)]);
    }
    report.auc_per_trial.push_back(auc(scores, labels));
  }

  double total = 0.0;
  for (double a : report.auc_per_trial) total += a;
  report.mean_auc = total / static_cast<double>(report.auc_per_trial.size());
  if (config.trials >= 2) report.coefficient_se = empirical_se(estimates);
  return report;
}

}  // namespace glmd
