#pragma once

#include <map>
#include <string>

#include "glmdist/datagen.hpp"
#include "glmdist/distributed.hpp"
#include "glmdist/metrics.hpp"

namespace glmd {

// Full description of one simulation sweep: every (p, K, method) cell runs
// `trials` Monte-Carlo repetitions on freshly generated data.
struct ExperimentConfig {
  FamilyKind model = FamilyKind::probit;
  std::int64_t n = 0;
  std::vector<int> p_list;
  std::vector<int> k_list;
  int trials = 1;
  double rho = 0.75;
  std::uint64_t base_seed = 1;
  std::vector<Method> methods;
  std::string output_dir = "out";
  // Strict mode drops non-converged trials from the metric formulas instead
  // of including them; their fraction is reported either way.
  bool strict = false;
  FitOptions fit;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
  void validate() const;
};

struct CellKey {
  int p = 0;
  int k = 0;
  Method method = Method::average;
  bool operator<(const CellKey& o) const {
    if (p != o.p) return p < o.p;
    if (k != o.k) return k < o.k;
    return static_cast<int>(method) < static_cast<int>(o.method);
  }
};

struct CellArchive {
  TrialArchive archive;
  std::int64_t failed_trials = 0;  // hard numerical/transport failures
};

using SweepArchives = std::map<CellKey, CellArchive>;

// Run the sweep with `jobs` concurrent trial workers (0 = hardware
// concurrency). Archives are returned and, when output_dir is non-empty,
// written out together with metrics.csv / summary.csv and the effective
// config.
SweepArchives run_experiment(const ExperimentConfig& config, const std::string& output_dir,
                             int jobs);

// Recompute metrics.csv and summary.csv from the archives in output_dir
// (written by a previous run). Output bytes are identical to the original
// run's for identical archives.
void write_report(const std::string& output_dir);

// Emission shared by run_experiment and write_report.
void emit_reports(const ExperimentConfig& config, const SweepArchives& archives,
                  const std::string& output_dir);

// Archive restricted to trials whose estimates are all finite (hard
// failures leave NaN rows), and, when converged_only is set, to trials
// whose local fits all converged. Metrics run over the surviving trials;
// the excluded counts are reported separately.
TrialArchive finite_trials(const TrialArchive& archive, bool converged_only = false);

std::string archive_filename(FamilyKind model, const CellKey& key);

}  // namespace glmd
