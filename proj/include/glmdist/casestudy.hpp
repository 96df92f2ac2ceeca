#pragma once

#include <string>

#include "glmdist/bspline.hpp"
#include "glmdist/distributed.hpp"

namespace glmd {

// Raw ingested records: a 0/1 label and a fixed number of real features per
// line, comma separated.
struct LabeledData {
  std::vector<double> labels;
  Matrix features;  // n x n_features
};

// Parse "label,f1,...,fm" lines. Every parse error reports its line number.
LabeledData read_labeled_csv(const std::string& path, int expected_features = -1);

struct CaseStudyConfig {
  std::string input_path;
  FamilyKind model = FamilyKind::logistic;
  Method method = Method::one_step;
  int k = 10;
  std::uint64_t seed = 1;
  double holdout_fraction = 0.2;
  int trials = 1;
  // 1-based covariate indices entering linearly; all others get a
  // fourth-order B-spline expansion with quartile knots (6 basis columns
  // each after dropping the first next to the intercept).
  std::vector<int> linear_features = {3, 6, 8};
  FitOptions fit;

  void validate() const;
};

struct CaseStudyReport {
  int design_columns = 0;
  std::int64_t rows = 0;
  std::vector<double> auc_per_trial;
  double mean_auc = 0.0;
  // Per-coefficient empirical SE across trials (empty when trials < 2).
  std::vector<double> coefficient_se;
  // Estimate from the last trial (diagnostic output).
  BetaVector last_estimate;
};

CaseStudyReport casestudy_run(const CaseStudyConfig& config);

// Expansion plan fixed by the training split: per expanded feature, the
// quartile knots and boundary (train min/max); column order is intercept,
// linear features in index order, then expanded blocks in covariate order.
struct ExpansionPlan {
  std::vector<int> linear_idx;    // 0-based column indices into the feature matrix
  std::vector<int> expanded_idx;  // 0-based, ascending
  std::vector<SplineSpec> specs;  // parallel to expanded_idx
  int columns() const;
  void expand_row(std::span<const double> features, double* out) const;
};

ExpansionPlan build_expansion_plan(const LabeledData& data, const std::vector<bool>& in_train,
                                   const std::vector<int>& linear_features_1based);

}  // namespace glmd
