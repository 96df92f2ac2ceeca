// glmdist command-line tool. All estimation goes through the C API in
// glmdist.h; this file only parses flags, shuffles JSON and maps status
// codes to exit codes (0 ok, 2 usage, 3 numerical, 4 transport).
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glmdist.h"

using nlohmann::json;

namespace {

int exit_code_for(glmd_status status) {
  switch (status) {
    case GLMD_OK: return 0;
    case GLMD_ERR_ARGUMENT:
    case GLMD_ERR_CONFIG:
    case GLMD_ERR_IO:
    case GLMD_ERR_DEGENERATE_KNOTS: return 2;
    case GLMD_ERR_TRANSPORT:
    case GLMD_ERR_PROTOCOL: return 4;
    default: return 3;  // numerical failures
  }
}

int fail(glmd_status status) {
  std::cerr << "error: " << glmd_last_error() << "\n";
  return exit_code_for(status);
}

glmd_family parse_family(const std::string& name) {
  if (name == "probit") return GLMD_FAMILY_PROBIT;
  if (name == "logistic") return GLMD_FAMILY_LOGISTIC;
  if (name == "poisson") return GLMD_FAMILY_POISSON;
  throw CLI::ValidationError("--model", "must be probit, logistic or poisson");
}

glmd_method parse_method(const std::string& name) {
  if (name == "average") return GLMD_METHOD_AVERAGE;
  if (name == "aee") return GLMD_METHOD_AEE;
  if (name == "one_step") return GLMD_METHOD_ONE_STEP;
  if (name == "csl_one_step") return GLMD_METHOD_CSL_ONE_STEP;
  if (name == "global") return GLMD_METHOD_GLOBAL;
  throw CLI::ValidationError("--method", "unknown method " + name);
}

double env_seconds(const char* var, double fallback) {
  const char* v = std::getenv(var);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  double s = std::strtod(v, &end);
  if (end == v || s <= 0) return fallback;
  return s;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json beta_json(const std::vector<double>& v) {
  // Emit through the fixed %.17g format so output bytes are reproducible.
  json arr = json::array();
  for (double x : v) arr.push_back(fmt17(x));
  return arr;
}

struct DatasetHandle {
  glmd_dataset* ptr = nullptr;
  ~DatasetHandle() { glmd_dataset_free(ptr); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed GLM estimation toolkit"};
  app.require_subcommand(1);

  double handshake_s = env_seconds("GLMD_HANDSHAKE_TIMEOUT_S", 30.0);
  double round_s = env_seconds("GLMD_ROUND_TIMEOUT_S", 300.0);

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo estimator sweep");
  std::string sim_config;
  std::string sim_output;
  std::uint64_t sim_seed = 0;
  bool sim_seed_set = false;
  int jobs = 0;
  simulate->add_option("--config", sim_config, "JSON sweep configuration")->required();
  simulate->add_option("--output", sim_output, "output directory (overrides config)");
  simulate->add_option("--seed", sim_seed, "base seed (overrides config)")
      ->each([&](const std::string&) { sim_seed_set = true; });
  simulate->add_option("--jobs", jobs, "concurrent trial workers (default: all cores)");
  bool sim_strict = false;
  simulate->add_flag("--strict", sim_strict, "exclude non-converged trials from metrics");

  // ---- fit ----
  auto* fit_cmd = app.add_subcommand("fit", "Fit one GLM by Fisher scoring");
  std::string fit_model = "logistic";
  std::string fit_input;
  bool fit_intercept = false;
  int fit_max_iter = 0;
  double fit_tol = 0.0;
  fit_cmd->add_option("--model", fit_model, "probit|logistic|poisson");
  fit_cmd->add_option("--input", fit_input, "CSV: response,feature1,...")->required();
  fit_cmd->add_flag("--intercept", fit_intercept, "prepend a column of ones");
  fit_cmd->add_option("--max-iterations", fit_max_iter, "iteration cap (default 50)");
  fit_cmd->add_option("--tolerance", fit_tol, "score max-norm tolerance (default 1e-8)");

  // ---- serve ----
  auto* serve = app.add_subcommand("serve", "Run the coordinator for k workers");
  std::string serve_model = "probit";
  std::string serve_method = "one_step";
  std::string serve_listen = "127.0.0.1:0";
  int serve_k = 0;
  serve->add_option("--model", serve_model, "probit|logistic|poisson");
  serve->add_option("--method", serve_method, "average|aee|one_step|csl_one_step");
  serve->add_option("--listen", serve_listen, "host:port (port 0 = ephemeral)");
  serve->add_option("--k", serve_k, "number of workers")->required();
  serve->add_option("--handshake-timeout", handshake_s, "seconds");
  serve->add_option("--round-timeout", round_s, "seconds");

  // ---- work ----
  auto* work = app.add_subcommand("work", "Serve one shard to a coordinator");
  std::string work_model = "probit";
  std::string work_connect;
  int work_id = 0;
  std::string work_data;
  std::string work_rows;
  std::string sim_spec_model;
  std::int64_t sim_n = 0;
  int sim_p = 0;
  double sim_rho = 0.75;
  std::uint64_t work_seed = 1;
  std::uint64_t sim_trial = 0;
  int sim_k = 0;
  work->add_option("--model", work_model, "probit|logistic|poisson");
  work->add_option("--connect", work_connect, "coordinator host:port")->required();
  work->add_option("--worker-id", work_id, "this worker's id (0-based)")->required();
  work->add_option("--data", work_data, "CSV shard: response,feature1,...");
  work->add_option("--rows", work_rows, "lo:hi row slice of --data");
  work->add_option("--sim-n", sim_n, "simulated total rows");
  work->add_option("--sim-p", sim_p, "simulated covariates");
  work->add_option("--sim-rho", sim_rho, "simulated AR(1) correlation");
  work->add_option("--sim-k", sim_k, "simulated shard count");
  work->add_option("--sim-trial", sim_trial, "simulated trial index");
  work->add_option("--seed", work_seed, "simulation base seed");
  work->add_option("--handshake-timeout", handshake_s, "seconds");
  work->add_option("--round-timeout", round_s, "seconds");

  // ---- casestudy ----
  auto* casestudy = app.add_subcommand("casestudy", "Spline-expanded distributed classification");
  std::string cs_input;
  std::string cs_model = "logistic";
  std::string cs_method = "one_step";
  std::string cs_output;
  int cs_k = 10;
  std::uint64_t cs_seed = 1;
  double cs_holdout = 0.2;
  int cs_trials = 1;
  casestudy->add_option("--input", cs_input, "CSV: label,f1,...,f18")->required();
  casestudy->add_option("--model", cs_model, "probit|logistic");
  casestudy->add_option("--method", cs_method, "estimator");
  casestudy->add_option("--k", cs_k, "shard count");
  casestudy->add_option("--seed", cs_seed, "split seed");
  casestudy->add_option("--holdout-fraction", cs_holdout, "holdout fraction (default 0.2)");
  casestudy->add_option("--trials", cs_trials, "number of repeated splits");
  casestudy->add_option("--output", cs_output, "directory for report.json");

  // ---- report ----
  auto* report = app.add_subcommand("report", "Recompute metrics from archives");
  std::string report_output;
  report->add_option("--output", report_output, "directory of a previous simulate run")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (simulate->parsed()) {
    std::ifstream in(sim_config);
    if (!in) {
      std::cerr << "error: cannot open config " << sim_config << "\n";
      return 2;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    json cfg;
    try {
      cfg = json::parse(ss.str());
    } catch (const std::exception& e) {
      std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
      return 2;
    }
    if (sim_seed_set) cfg["base_seed"] = sim_seed;
    if (!sim_output.empty()) cfg["output_dir"] = sim_output;
    if (sim_strict) cfg["strict"] = true;
    std::string dir = cfg.value("output_dir", std::string("out"));
    glmd_status rc = glmd_run_experiment(cfg.dump().c_str(), dir.c_str(), jobs);
    if (rc != GLMD_OK) return fail(rc);
    std::cout << "wrote archives, metrics.csv and summary.csv under " << dir << "\n";
    return 0;
  }

  if (fit_cmd->parsed()) {
    DatasetHandle data;
    glmd_status rc = glmd_dataset_from_csv(fit_input.c_str(), fit_intercept ? 1 : 0, &data.ptr);
    if (rc != GLMD_OK) return fail(rc);
    if (glmd_dataset_rows(data.ptr) < glmd_dataset_cols(data.ptr))
      std::cerr << "warning: fewer rows than parameters (n < p)\n";
    glmd_fit_options opts;
    glmd_fit_options_init(&opts);
    if (fit_max_iter > 0) opts.max_iterations = fit_max_iter;
    if (fit_tol > 0) opts.score_tolerance = fit_tol;
    glmd_fit_result* fit = nullptr;
    rc = glmd_fit_mle(parse_family(fit_model), data.ptr, nullptr, &opts, &fit);
    if (rc != GLMD_OK) return fail(rc);
    int32_t p = glmd_fit_dim(fit);
    std::vector<double> est(p), se(p);
    glmd_fit_estimate(fit, est.data());
    glmd_status se_rc = glmd_fit_stderrs(fit, se.data());
    json out;
    out["model"] = fit_model;
    out["converged"] = glmd_fit_converged(fit) == 1;
    out["iterations"] = glmd_fit_iterations(fit);
    out["score_norm"] = fmt17(glmd_fit_score_norm(fit));
    out["estimate"] = beta_json(est);
    if (se_rc == GLMD_OK) out["stderr"] = beta_json(se);
    glmd_fit_result_free(fit);
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (serve->parsed()) {
    if (serve_k < 1) {
      std::cerr << "error: --k must be >= 1\n";
      return 2;
    }
    glmd_distributed_result* result = nullptr;
    auto on_listening = [](const char* addr, void*) {
      std::cout << "listening " << addr << "\n" << std::flush;
    };
    glmd_status rc =
        glmd_coordinator_run(parse_family(serve_model), serve_k, parse_method(serve_method),
                             serve_listen.c_str(), nullptr, handshake_s, round_s, on_listening,
                             nullptr, &result);
    if (rc != GLMD_OK) return fail(rc);
    int32_t p = glmd_distributed_dim(result);
    std::vector<double> est(p);
    glmd_distributed_estimate(result, est.data());
    json out;
    out["method"] = serve_method;
    out["rounds_of_communication"] = glmd_distributed_rounds(result);
    out["estimate"] = beta_json(est);
    json conv = json::array();
    for (int32_t w = 0; w < glmd_distributed_workers(result); ++w)
      conv.push_back(glmd_distributed_local_converged(result, w) == 1);
    out["local_convergence"] = conv;
    glmd_distributed_result_free(result);
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (work->parsed()) {
    DatasetHandle shard;
    glmd_status rc;
    if (!work_data.empty()) {
      DatasetHandle whole;
      rc = glmd_dataset_from_csv(work_data.c_str(), 0, &whole.ptr);
      if (rc != GLMD_OK) return fail(rc);
      if (!work_rows.empty()) {
        auto colon = work_rows.find(':');
        if (colon == std::string::npos) {
          std::cerr << "error: --rows must be lo:hi\n";
          return 2;
        }
        std::int64_t lo = std::strtoll(work_rows.c_str(), nullptr, 10);
        std::int64_t hi = std::strtoll(work_rows.c_str() + colon + 1, nullptr, 10);
        rc = glmd_dataset_slice(whole.ptr, lo, hi, &shard.ptr);
        if (rc != GLMD_OK) return fail(rc);
      } else {
        shard.ptr = whole.ptr;
        whole.ptr = nullptr;
      }
    } else if (sim_n > 0 && sim_p > 0 && sim_k > 0) {
      rc = glmd_dataset_simulate_shard(parse_family(work_model), sim_n, sim_p, sim_rho, work_seed,
                                       sim_trial, sim_k, work_id, &shard.ptr);
      if (rc != GLMD_OK) return fail(rc);
    } else {
      std::cerr << "error: provide --data or the --sim-n/--sim-p/--sim-k generator spec\n";
      return 2;
    }
    rc = glmd_worker_run(parse_family(work_model), shard.ptr, work_id, work_connect.c_str(),
                         nullptr, handshake_s, round_s, nullptr);
    if (rc != GLMD_OK) return fail(rc);
    std::cout << "worker " << work_id << " done\n";
    return 0;
  }

  if (casestudy->parsed()) {
    json cfg;
    cfg["input"] = cs_input;
    cfg["model"] = cs_model;
    cfg["method"] = cs_method;
    cfg["k"] = cs_k;
    cfg["seed"] = cs_seed;
    cfg["holdout_fraction"] = cs_holdout;
    cfg["trials"] = cs_trials;
    char* report_json = nullptr;
    glmd_status rc = glmd_casestudy_run(cfg.dump().c_str(), &report_json);
    if (rc != GLMD_OK) return fail(rc);
    std::string text = report_json;
    glmd_string_free(report_json);
    if (!cs_output.empty()) {
      std::string path = cs_output + "/report.json";
      std::ofstream out(path);
      if (!out) {
        std::cerr << "error: cannot write " << path << "\n";
        return 2;
      }
      out << text << "\n";
    }
    std::cout << text << "\n";
    return 0;
  }

  if (report->parsed()) {
    glmd_status rc = glmd_write_report(report_output.c_str());
    if (rc != GLMD_OK) return fail(rc);
    std::cout << "rewrote metrics.csv and summary.csv under " << report_output << "\n";
    return 0;
  }

  return 2;
}
