#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "glmdist/experiment.hpp"

using namespace glmd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.model = FamilyKind::logistic;
  c.n = 256;
  c.p_list = {2};
  c.k_list = {1, 2};
  c.trials = 3;
  c.rho = 0.5;
  c.base_seed = 99;
  c.methods = {Method::average, Method::aee, Method::one_step, Method::csl_one_step,
               Method::global};
  return c;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config json round trip and validation") {
  ExperimentConfig c = tiny_config();
  auto back = ExperimentConfig::from_json_text(c.to_json_text());
  CHECK(back.model == c.model);
  CHECK(back.n == c.n);
  CHECK(back.p_list == c.p_list);
  CHECK(back.k_list == c.k_list);
  CHECK(back.trials == c.trials);
  CHECK(back.base_seed == c.base_seed);
  CHECK(back.methods == c.methods);

  CHECK_THROWS_AS(ExperimentConfig::from_json_text("not json"), ConfigError);
  ExperimentConfig bad = tiny_config();
  bad.k_list = {200};  // leaves shards of 1 < p rows
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny_config();
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("a tiny sweep produces complete, deterministic outputs") {
  ExperimentConfig config = tiny_config();
  TempDir dir("glmd_sweep_test");

  SweepArchives archives = run_experiment(config, dir.path.string(), 2);

  // every (p, K, method) cell carries exactly `trials` rows
  for (int k : config.k_list)
    for (Method m : config.methods) {
      auto it = archives.find(CellKey{2, k, m});
      REQUIRE(it != archives.end());
      CHECK(it->second.archive.trials() == config.trials);
      CHECK(it->second.failed_trials == 0);
      CHECK(fs::exists(dir.path / archive_filename(config.model, it->first)));
    }
  CHECK(fs::exists(dir.path / "metrics.csv"));
  CHECK(fs::exists(dir.path / "summary.csv"));
  CHECK(fs::exists(dir.path / "config.json"));

  // headers pinned by the output contract
  std::string metrics = slurp(dir.path / "metrics.csv");
  CHECK(metrics.rfind("model,p,K,method,coord,rmse,re,cpci,rc,nonconverged_frac\n", 0) == 0);

  // K = 1: one_step sits at the global MLE (fixed point of the update)
  const auto& one_step = archives.at(CellKey{2, 1, Method::one_step}).archive;
  const auto& global = archives.at(CellKey{2, 1, Method::global}).archive;
  for (int t = 0; t < config.trials; ++t)
    for (int j = 0; j < 2; ++j)
      CHECK(one_step.estimates(t, j) == doctest::Approx(global.estimates(t, j)).epsilon(1e-6));

  // rerunning the sweep reproduces every output byte
  TempDir dir2("glmd_sweep_test_rerun");
  run_experiment(config, dir2.path.string(), 1);
  for (const auto& name : {"metrics.csv", "summary.csv", "config.json"})
    CHECK(slurp(dir.path / name) == slurp(dir2.path / name));
  for (int k : config.k_list)
    for (Method m : config.methods) {
      auto file = archive_filename(config.model, CellKey{2, k, m});
      CHECK(slurp(dir.path / file) == slurp(dir2.path / file));
    }

  // report recomputes metrics.csv and summary.csv byte-identically
  std::string metrics_before = slurp(dir.path / "metrics.csv");
  std::string summary_before = slurp(dir.path / "summary.csv");
  fs::remove(dir.path / "metrics.csv");
  fs::remove(dir.path / "summary.csv");
  write_report(dir.path.string());
  CHECK(slurp(dir.path / "metrics.csv") == metrics_before);
  CHECK(slurp(dir.path / "summary.csv") == summary_before);
}

TEST_CASE("wald variances equal per-column fisher solves") {
  // The archived variance of coordinate j is the j-th diagonal entry of the
  // inverse Fisher matrix at the estimate; the same number must come out of
  // solving F x = e_j and reading x_j.
  ExperimentConfig config = tiny_config();
  config.k_list = {2};
  config.trials = 2;
  SweepArchives archives = run_experiment(config, "", 1);
  const auto& cell = archives.at(CellKey{2, 2, Method::one_step}).archive;
  GlmFamily family = GlmFamily::make(config.model);
  BetaVector beta0 = true_beta(config.model, 2);
  for (int t = 0; t < config.trials; ++t) {
    SimDesign design{config.model, config.n, 2, config.rho, config.base_seed, 2};
    Dataset pooled = concat_shards(gen_trial_shards(family, design, beta0, t));
    BetaVector est{cell.estimates(t, 0), cell.estimates(t, 1)};
    auto factor = cholesky(fisher_info(family, pooled, est));
    for (int j = 0; j < 2; ++j) {
      std::vector<double> e(2, 0.0);
      e[j] = 1.0;
      auto col = spd_solve(factor, e);
      CHECK(std::fabs(cell.variances->row(t)[j] - col[j]) <= 1e-10);
    }
  }
}

TEST_CASE("adding methods to a sweep never changes existing archives") {
  ExperimentConfig lean = tiny_config();
  lean.methods = {Method::global};
  ExperimentConfig wide = tiny_config();

  TempDir a("glmd_seed_stability_a");
  TempDir b("glmd_seed_stability_b");
  run_experiment(lean, a.path.string(), 1);
  run_experiment(wide, b.path.string(), 2);
  for (int k : lean.k_list) {
    auto file = archive_filename(lean.model, CellKey{2, k, Method::global});
    CHECK(slurp(a.path / file) == slurp(b.path / file));
  }
}

TEST_CASE("strict mode drops non-converged trials from the formulas") {
  // Hand-built archives: trial 1 of the method cell carries a wild estimate
  // flagged as non-converged. Strict metrics must ignore it.
  ExperimentConfig config = tiny_config();
  config.trials = 3;
  config.k_list = {1};
  config.methods = {Method::one_step, Method::global};

  SweepArchives archives;
  auto make_cell = [&](Method m, double outlier) {
    CellArchive cell;
    cell.archive.method = method_name(m);
    cell.archive.estimates = Matrix(3, 2, {0.1, -0.1, outlier, -0.1, 0.12, -0.08});
    cell.archive.variances = Matrix(3, 2, {1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3});
    cell.archive.converged = {true, outlier == 0.1, true};
    archives.emplace(CellKey{2, 1, m}, std::move(cell));
  };
  make_cell(Method::one_step, 25.0);  // flagged trial
  make_cell(Method::global, 0.1);

  TempDir loose_dir("glmd_strict_off");
  TempDir strict_dir("glmd_strict_on");
  emit_reports(config, archives, loose_dir.path.string());
  config.strict = true;
  emit_reports(config, archives, strict_dir.path.string());

  auto first_rmse = [](const fs::path& dir) {
    std::ifstream in(dir / "metrics.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.find("one_step,0,") == std::string::npos) continue;
      std::stringstream ss(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      return std::stod(fields[5]);
    }
    return -1.0;
  };
  double loose_rmse = first_rmse(loose_dir.path);
  double strict_rmse = first_rmse(strict_dir.path);
  CHECK(loose_rmse > 10.0);     // the outlier dominates
  CHECK(strict_rmse < 0.5);     // strict mode removed it
  // the non-converged fraction is reported either way
  std::string metrics = slurp(strict_dir.path / "metrics.csv");
  CHECK(metrics.find("0.33333333333333331") != std::string::npos);
}

TEST_CASE("summary statistics are ordered min <= median <= max") {
  ExperimentConfig config = tiny_config();
  config.k_list = {2};
  config.trials = 4;
  TempDir dir("glmd_summary_test");
  run_experiment(config, dir.path.string(), 2);
  std::ifstream in(dir.path / "summary.csv");
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    REQUIRE(fields.size() >= 10);
    if (!fields[4].empty()) {
      double re_min = std::stod(fields[4]), re_med = std::stod(fields[5]),
             re_max = std::stod(fields[6]);
      CHECK(re_min <= re_med);
      CHECK(re_med <= re_max);
    }
    if (!fields[7].empty()) {
      double rc_min = std::stod(fields[7]), rc_med = std::stod(fields[8]),
             rc_max = std::stod(fields[9]);
      CHECK(rc_min <= rc_med);
      CHECK(rc_med <= rc_max);
    }
  }
}
