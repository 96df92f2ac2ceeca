#include "glmdist/experiment.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace glmd {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  try {
    c.model = family_from_name(j.at("model").get<std::string>());
    c.n = j.at("n").get<std::int64_t>();
    c.p_list = j.at("p_list").get<std::vector<int>>();
    c.k_list = j.at("k_list").get<std::vector<int>>();
    c.trials = j.at("trials").get<int>();
    if (j.contains("rho")) c.rho = j.at("rho").get<double>();
    if (j.contains("base_seed")) c.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("strict")) c.strict = j.at("strict").get<bool>();
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(method_from_name(m.get<std::string>()));
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      if (f.contains("max_iterations")) c.fit.max_iterations = f.at("max_iterations").get<int>();
      if (f.contains("score_tolerance")) c.fit.score_tolerance = f.at("score_tolerance").get<double>();
      if (f.contains("step_halving_max")) c.fit.step_halving_max = f.at("step_halving_max").get<int>();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["model"] = family_name(model);
  j["n"] = n;
  j["p_list"] = p_list;
  j["k_list"] = k_list;
  j["trials"] = trials;
  j["rho"] = rho;
  j["base_seed"] = base_seed;
  j["output_dir"] = output_dir;
  j["strict"] = strict;
  json methods_json = json::array();
  for (Method m : methods) methods_json.push_back(method_name(m));
  j["methods"] = methods_json;
  j["fit"] = {{"max_iterations", fit.max_iterations},
              {"score_tolerance", fit.score_tolerance},
              {"step_halving_max", fit.step_halving_max}};
  return j.dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  if (n < 1) throw ConfigError("n must be >= 1");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (p_list.empty() || k_list.empty() || methods.empty())
    throw ConfigError("p_list, k_list and methods must be non-empty");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("rho must be in [0,1)");
  int max_p = 0;
  for (int p : p_list) {
    if (p < 1) throw ConfigError("p must be >= 1");
    max_p = std::max(max_p, p);
  }
  for (int k : k_list) {
    if (k < 1) throw ConfigError("K must be >= 1");
    if (n / k < max_p)
      throw ConfigError("K = " + std::to_string(k) + " leaves shards smaller than p = " +
                        std::to_string(max_p));
  }
  fit.validate();
}

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct TrialTask {
  int p_idx;
  int k_idx;
  int trial;
};

// Mutable archive slots written concurrently by trial workers (disjoint
// rows; vector<uint8_t> instead of vector<bool> so flag writes do not race).
struct CellSlots {
  Matrix estimates;
  Matrix variances;
  std::vector<std::uint8_t> converged;
  std::atomic<std::int64_t> failed{0};
};

}  // namespace

std::string archive_filename(FamilyKind model, const CellKey& key) {
  std::ostringstream name;
  name << "archive_" << family_name(model) << "_p" << key.p << "_K" << key.k << "_"
       << method_name(key.method) << ".csv";
  return name.str();
}

SweepArchives run_experiment(const ExperimentConfig& config, const std::string& output_dir,
                             int jobs) {
  config.validate();
  const GlmFamily family = GlmFamily::make(config.model);
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;

  // Slot storage per (p, K) cell and method.
  std::map<std::pair<int, int>, std::map<Method, CellSlots>> slots;
  for (int p : config.p_list)
    for (int k : config.k_list) {
      auto& cell = slots[{p, k}];
      for (Method m : config.methods) {
        CellSlots& s = cell[m];
        s.estimates = Matrix(config.trials, p);
        s.variances = Matrix(config.trials, p);
        s.converged.assign(config.trials, 0);
      }
    }

  std::vector<TrialTask> tasks;
  for (int pi = 0; pi < static_cast<int>(config.p_list.size()); ++pi)
    for (int ki = 0; ki < static_cast<int>(config.k_list.size()); ++ki)
      for (int t = 0; t < config.trials; ++t) tasks.push_back({pi, ki, t});

  std::atomic<std::size_t> next{0};
  std::mutex log_mu;

  auto run_trial = [&](const TrialTask& task) {
    const int p = config.p_list[task.p_idx];
    const int k = config.k_list[task.k_idx];
    SimDesign design{config.model, config.n, p, config.rho, config.base_seed, k};
    const BetaVector beta0 = true_beta(config.model, p);
    std::vector<Shard> shards =
        gen_trial_shards(family, design, beta0, static_cast<std::uint64_t>(task.trial));
    Dataset pooled = concat_shards(shards);
    TransportSpec transport;  // in-process

    auto& cell = slots.at({p, k});
    for (Method m : config.methods) {
      CellSlots& slot = cell.at(m);
      try {
        DistributedEstimate est = run_distributed(family, shards, config.fit, m, transport);
        bool all_converged = true;
        for (bool c : est.local_convergence) all_converged = all_converged && c;
        // Wald variances from the pooled Fisher information at this trial's
        // estimate.
        SpdMatrix fisher = fisher_info(family, pooled, est.estimate);
        SpdMatrix finv = spd_inverse(cholesky(fisher));
        auto est_row = slot.estimates.row(task.trial);
        auto var_row = slot.variances.row(task.trial);
        for (int j = 0; j < p; ++j) {
          est_row[j] = est.estimate[j];
          var_row[j] = finv(j, j);
        }
        slot.converged[task.trial] = all_converged ? 1 : 0;
      } catch (const Error& e) {
        slot.failed.fetch_add(1);
        auto est_row = slot.estimates.row(task.trial);
        auto var_row = slot.variances.row(task.trial);
        for (int j = 0; j < p; ++j) {
          est_row[j] = std::numeric_limits<double>::quiet_NaN();
          var_row[j] = std::numeric_limits<double>::quiet_NaN();
        }
        slot.converged[task.trial] = 0;
        std::lock_guard lock(log_mu);
        std::cerr << "trial " << task.trial << " p=" << p << " K=" << k << " method "
                  << method_name(m) << " failed: " << e.what() << "\n";
      }
    }
  };

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      run_trial(tasks[i]);
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  SweepArchives archives;
  for (int p : config.p_list)
    for (int k : config.k_list)
      for (Method m : config.methods) {
        CellSlots& s = slots[{p, k}].at(m);
        CellArchive cell;
        cell.archive.method = method_name(m);
        cell.archive.estimates = std::move(s.estimates);
        cell.archive.variances = std::move(s.variances);
        cell.archive.converged.assign(s.converged.begin(), s.converged.end());
        cell.failed_trials = s.failed.load();
        archives.emplace(CellKey{p, k, m}, std::move(cell));
      }

  if (!output_dir.empty()) {
    fs::create_directories(output_dir);
    {
      std::ofstream cfg(fs::path(output_dir) / "config.json");
      cfg << config.to_json_text();
    }
    for (const auto& [key, cell] : archives) {
      std::ofstream out(fs::path(output_dir) / archive_filename(config.model, key));
      const int p = key.p;
      out << "trial,converged";
      for (int j = 0; j < p; ++j) out << ",beta_" << j;
      for (int j = 0; j < p; ++j) out << ",var_" << j;
      out << "\n";
      for (std::int64_t t = 0; t < cell.archive.trials(); ++t) {
        out << t << "," << (cell.archive.converged[t] ? 1 : 0);
        auto est = cell.archive.estimates.row(t);
        for (int j = 0; j < p; ++j) out << "," << fmt_double(est[j]);
        auto var = cell.archive.variances->row(t);
        for (int j = 0; j < p; ++j) out << "," << fmt_double(var[j]);
        out << "\n";
      }
    }
    emit_reports(config, archives, output_dir);
  }
  return archives;
}

TrialArchive finite_trials(const TrialArchive& a, bool converged_only) {
  std::vector<std::int64_t> keep;
  for (std::int64_t t = 0; t < a.trials(); ++t) {
    bool ok = !converged_only || a.converged[t];
    auto row = a.estimates.row(t);
    for (int j = 0; j < a.p(); ++j) ok = ok && std::isfinite(row[j]);
    if (ok) keep.push_back(t);
  }
  if (static_cast<std::int64_t>(keep.size()) == a.trials()) return a;
  if (keep.empty()) throw ArgumentError("cell has no usable trials");
  TrialArchive out;
  out.method = a.method;
  out.estimates = Matrix(static_cast<std::int64_t>(keep.size()), a.p());
  out.variances = Matrix(static_cast<std::int64_t>(keep.size()), a.p());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    auto src_e = a.estimates.row(keep[i]);
    auto src_v = a.variances->row(keep[i]);
    auto dst_e = out.estimates.row(static_cast<std::int64_t>(i));
    auto dst_v = out.variances->row(static_cast<std::int64_t>(i));
    for (int j = 0; j < a.p(); ++j) {
      dst_e[j] = src_e[j];
      dst_v[j] = src_v[j];
    }
    out.converged.push_back(a.converged[keep[i]]);
  }
  return out;
}

void emit_reports(const ExperimentConfig& config, const SweepArchives& archives,
                  const std::string& output_dir) {
  fs::create_directories(output_dir);
  std::ofstream metrics(fs::path(output_dir) / "metrics.csv");
  metrics << "model,p,K,method,coord,rmse,re,cpci,rc,nonconverged_frac\n";
  std::ofstream summary(fs::path(output_dir) / "summary.csv");
  summary << "model,p,K,method,re_min,re_median,re_max,rc_min,rc_median,rc_max,"
             "rmse_median,cpci_median,nonconverged_frac\n";

  for (int p : config.p_list) {
    for (int k : config.k_list) {
      // Global baseline for this (p, K) cell, if it was run.
      const CellArchive* global_cell = nullptr;
      auto git = archives.find(CellKey{p, k, Method::global});
      if (git != archives.end()) global_cell = &git->second;
      std::optional<TrialArchive> baseline;
      std::vector<double> base_rmse, base_cpci;
      if (global_cell) {
        baseline = finite_trials(global_cell->archive, config.strict);
        base_rmse = coordinatewise_rmse(*baseline, true_beta(config.model, p));
        base_cpci = coverage(*baseline, true_beta(config.model, p));
      }

      for (Method m : config.methods) {
        auto it = archives.find(CellKey{p, k, m});
        if (it == archives.end()) continue;
        const CellArchive& cell = it->second;
        const BetaVector beta0 = true_beta(config.model, p);
        TrialArchive usable = finite_trials(cell.archive, config.strict);
        std::vector<double> rmse = coordinatewise_rmse(usable, beta0);
        std::vector<double> cpci = coverage(usable, beta0);
        double noncov = cell.archive.nonconverged_fraction();

        std::vector<double> res, rcs;
        for (int j = 0; j < p; ++j) {
          std::string re_str, rc_str;
          if (global_cell && base_rmse[j] > 0.0) {
            double re = rmse[j] / base_rmse[j];
            re_str = fmt_double(re);
            res.push_back(re);
          }
          if (global_cell && base_cpci[j] > 0.0) {
            double rc = cpci[j] / base_cpci[j];
            rc_str = fmt_double(rc);
            rcs.push_back(rc);
          }
          metrics << family_name(config.model) << "," << p << "," << k << "," << method_name(m)
                  << "," << j << "," << fmt_double(rmse[j]) << "," << re_str << ","
                  << fmt_double(cpci[j]) << "," << rc_str << "," << fmt_double(noncov) << "\n";
        }

        auto stats3 = [](std::vector<double> v) -> std::array<std::string, 3> {
          if (v.empty()) return {"", "", ""};
          std::sort(v.begin(), v.end());
          return {fmt_double(v.front()), fmt_double(median(v)), fmt_double(v.back())};
        };
        auto re_stats = stats3(res);
        auto rc_stats = stats3(rcs);
        summary << family_name(config.model) << "," << p << "," << k << "," << method_name(m)
                << "," << re_stats[0] << "," << re_stats[1] << "," << re_stats[2] << ","
                << rc_stats[0] << "," << rc_stats[1] << "," << rc_stats[2] << ","
                << fmt_double(median(rmse)) << "," << fmt_double(median(cpci)) << ","
                << fmt_double(noncov) << "\n";
      }
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

void write_report(const std::string& output_dir) {
  ExperimentConfig config =
      ExperimentConfig::from_json_file((fs::path(output_dir) / "config.json").string());
  SweepArchives archives;
  for (int p : config.p_list)
    for (int k : config.k_list)
      for (Method m : config.methods) {
        CellKey key{p, k, m};
        fs::path path = fs::path(output_dir) / archive_filename(config.model, key);
        std::ifstream in(path);
        if (!in) throw IoError("missing archive file: " + path.string());
        std::string line;
        std::getline(in, line);  // header
        CellArchive cell;
        cell.archive.method = method_name(m);
        std::vector<double> est_rows, var_rows;
        std::vector<bool> conv;
        std::int64_t t_count = 0;
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          auto fields = split_csv_line(line);
          if (static_cast<int>(fields.size()) != 2 + 2 * p)
            throw IoError("bad archive row in " + path.string());
          conv.push_back(fields[1] == "1");
          for (int j = 0; j < p; ++j) est_rows.push_back(std::strtod(fields[2 + j].c_str(), nullptr));
          for (int j = 0; j < p; ++j)
            var_rows.push_back(std::strtod(fields[2 + p + j].c_str(), nullptr));
          ++t_count;
        }
        cell.archive.estimates = Matrix(t_count, p, std::move(est_rows));
        cell.archive.variances = Matrix(t_count, p, std::move(var_rows));
        cell.archive.converged = std::move(conv);
        archives.emplace(key, std::move(cell));
      }
  emit_reports(config, archives, output_dir);
}

}  // namespace glmd
