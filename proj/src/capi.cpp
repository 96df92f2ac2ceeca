#include "glmdist.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "glmdist/casestudy.hpp"
#include "glmdist/datagen.hpp"
#include "glmdist/experiment.hpp"
#include "glmdist/protocol.hpp"

using nlohmann::json;

namespace {

thread_local std::string g_last_error;

glmd_status status_of(const glmd::Error& e) {
  return static_cast<glmd_status>(static_cast<int>(e.code()));
}

template <typename Fn>
glmd_status wrap(Fn&& fn) {
  try {
    fn();
    return GLMD_OK;
  } catch (const glmd::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GLMD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GLMD_ERR_INTERNAL;
  }
}

glmd::GlmFamily family_of(glmd_family f) {
  switch (f) {
    case GLMD_FAMILY_PROBIT: return glmd::GlmFamily::probit();
    case GLMD_FAMILY_LOGISTIC: return glmd::GlmFamily::logistic();
    case GLMD_FAMILY_POISSON: return glmd::GlmFamily::poisson();
  }
  throw glmd::ArgumentError("unknown family code");
}

glmd::Method method_of(glmd_method m) {
  if (m < GLMD_METHOD_AVERAGE || m > GLMD_METHOD_GLOBAL)
    throw glmd::ArgumentError("unknown method code");
  return static_cast<glmd::Method>(static_cast<int>(m));
}

glmd::FitOptions options_of(const glmd_fit_options* opts) {
  glmd::FitOptions o;
  if (opts) {
    o.max_iterations = opts->max_iterations;
    o.score_tolerance = opts->score_tolerance;
    o.step_halving_max = opts->step_halving_max;
  }
  o.validate();
  return o;
}

const double* require_ptr(const double* p, const char* what) {
  if (!p) throw glmd::ArgumentError(std::string(what) + " must not be null");
  return p;
}

glmd::BetaVector beta_of(const double* beta, int p, const char* what) {
  require_ptr(beta, what);
  return glmd::BetaVector(beta, beta + p);
}

}  // namespace

struct glmd_dataset {
  glmd::Dataset data;
};

struct glmd_fit_result {
  glmd::FitResult fit;
};

struct glmd_distributed_result {
  glmd::DistributedEstimate est;
};

extern "C" {

const char* glmd_version(void) { return "1.0.0"; }

const char* glmd_last_error(void) { return g_last_error.c_str(); }

void glmd_fit_options_init(glmd_fit_options* opts) {
  if (!opts) return;
  glmd::FitOptions defaults;
  opts->max_iterations = defaults.max_iterations;
  opts->score_tolerance = defaults.score_tolerance;
  opts->step_halving_max = defaults.step_halving_max;
}

glmd_status glmd_family_eval(glmd_family family, glmd_family_fn fn, double eta, double* out) {
  return wrap([&] {
    require_ptr(out, "out");
    if (fn < GLMD_FN_H || fn > GLMD_FN_W) throw glmd::ArgumentError("unknown family function");
    *out = glmd::family_eval(family_of(family), static_cast<glmd::FamilyFn>(static_cast<int>(fn)),
                             eta);
  });
}

glmd_status glmd_dataset_create(int64_t n, int32_t p, const double* design_row_major,
                                const double* response, glmd_dataset** out) {
  return wrap([&] {
    if (!out) throw glmd::ArgumentError("out must not be null");
    if (n < 1 || p < 1) throw glmd::ArgumentError("n and p must be >= 1");
    require_ptr(design_row_major, "design");
    require_ptr(response, "response");
    auto ds = std::make_unique<glmd_dataset>();
    ds->data.design = glmd::Matrix(
        n, p, std::vector<double>(design_row_major,
                                  design_row_major + static_cast<std::size_t>(n) * p));
    ds->data.response.assign(response, response + n);
    for (double x : ds->data.design.data())
      if (!std::isfinite(x)) throw glmd::DomainError("design contains a non-finite value");
    glmd::require_finite(ds->data.response, "response");
    *out = ds.release();
  });
}

glmd_status glmd_dataset_simulate(glmd_family family, int64_t n, int32_t p, double rho,
                                  uint64_t base_seed, uint64_t trial, int32_t k_shards,
                                  glmd_dataset** out) {
  return wrap([&] {
    if (!out) throw glmd::ArgumentError("out must not be null");
    glmd::GlmFamily fam = family_of(family);
    glmd::SimDesign design{fam.kind(), n, p, rho, base_seed, k_shards};
    auto shards = glmd::gen_trial_shards(fam, design, glmd::true_beta(fam.kind(), p), trial);
    auto ds = std::make_unique<glmd_dataset>();
    ds->data = glmd::concat_shards(shards);
    *out = ds.release();
  });
}

glmd_status glmd_dataset_simulate_shard(glmd_family family, int64_t n, int32_t p, double rho,
                                        uint64_t base_seed, uint64_t trial, int32_t k_shards,
                                        int32_t worker_id, glmd_dataset** out) {
  return wrap([&] {
    if (!out) throw glmd::ArgumentError("out must not be null");
    if (worker_id < 0 || worker_id >= k_shards)
      throw glmd::ArgumentError("worker_id out of range");
    glmd::GlmFamily fam = family_of(family);
    auto sizes = glmd::shard_sizes(n, k_shards);
    glmd::SimDesign local{fam.kind(), sizes[worker_id], p, rho,
                          glmd::shard_design_seed(base_seed, trial, worker_id), 1};
    auto ds = std::make_unique<glmd_dataset>();
    ds->data.design = glmd::gen_design(local);
    ds->data.response =
        glmd::gen_response(fam, ds->data.design, glmd::true_beta(fam.kind(), p),
                           glmd::shard_response_seed(base_seed, trial, worker_id));
    *out = ds.release();
  });
}

glmd_status glmd_dataset_from_csv(const char* path, int add_intercept, glmd_dataset** out) {
  return wrap([&] {
    if (!out || !path) throw glmd::ArgumentError("path and out must not be null");
    glmd::LabeledData raw = glmd::read_labeled_csv(path);
    auto ds = std::make_unique<glmd_dataset>();
    const std::int64_t n = raw.features.rows();
    const int m = raw.features.cols();
    const int p = m + (add_intercept ? 1 : 0);
    if (p < 1) throw glmd::ArgumentError("csv has no feature columns and no intercept requested");
    ds->data.design = glmd::Matrix(n, p);
    for (std::int64_t i = 0; i < n; ++i) {
      auto dst = ds->data.design.row(i);
      int col = 0;
      if (add_intercept) dst[col++] = 1.0;
      auto src = raw.features.row(i);
      for (int j = 0; j < m; ++j) dst[col++] = src[j];
    }
    ds->data.response = std::move(raw.labels);
    *out = ds.release();
  });
}

glmd_status glmd_dataset_slice(const glmd_dataset* data, int64_t row_begin, int64_t row_end,
                               glmd_dataset** out) {
  return wrap([&] {
    if (!out || !data) throw glmd::ArgumentError("data and out must not be null");
    if (row_begin < 0 || row_end > data->data.n() || row_begin >= row_end)
      throw glmd::ArgumentError("invalid row slice");
    auto ds = std::make_unique<glmd_dataset>();
    const int p = data->data.p();
    ds->data.design = glmd::Matrix(row_end - row_begin, p);
    for (std::int64_t i = row_begin; i < row_end; ++i) {
      auto src = data->data.design.row(i);
      auto dst = ds->data.design.row(i - row_begin);
      std::memcpy(dst.data(), src.data(), sizeof(double) * static_cast<std::size_t>(p));
    }
    ds->data.response.assign(data->data.response.begin() + row_begin,
                             data->data.response.begin() + row_end);
    *out = ds.release();
  });
}

int64_t glmd_dataset_rows(const glmd_dataset* data) { return data ? data->data.n() : 0; }
int32_t glmd_dataset_cols(const glmd_dataset* data) { return data ? data->data.p() : 0; }
void glmd_dataset_free(glmd_dataset* data) { delete data; }

glmd_status glmd_log_likelihood(glmd_family family, const glmd_dataset* data, const double* beta,
                                double* out) {
  return wrap([&] {
    if (!data || !out) throw glmd::ArgumentError("data and out must not be null");
    glmd::GlmFamily fam = family_of(family);
    data->data.validate(fam.kind());
    *out = glmd::log_likelihood(fam, data->data, beta_of(beta, data->data.p(), "beta"));
  });
}

glmd_status glmd_score(glmd_family family, const glmd_dataset* data, const double* beta,
                       double* out) {
  return wrap([&] {
    if (!data || !out) throw glmd::ArgumentError("data and out must not be null");
    glmd::GlmFamily fam = family_of(family);
    data->data.validate(fam.kind());
    auto s = glmd::score(fam, data->data, beta_of(beta, data->data.p(), "beta"));
    std::memcpy(out, s.data(), sizeof(double) * s.size());
  });
}

glmd_status glmd_fisher_info(glmd_family family, const glmd_dataset* data, const double* beta,
                             double* out) {
  return wrap([&] {
    if (!data || !out) throw glmd::ArgumentError("data and out must not be null");
    glmd::GlmFamily fam = family_of(family);
    data->data.validate(fam.kind());
    auto f = glmd::fisher_info(fam, data->data, beta_of(beta, data->data.p(), "beta"));
    std::memcpy(out, f.entries().data(), sizeof(double) * f.entries().size());
  });
}

glmd_status glmd_observed_hessian(glmd_family family, const glmd_dataset* data, const double* beta,
                                  double* out) {
  return wrap([&] {
    if (!data || !out) throw glmd::ArgumentError("data and out must not be null");
    glmd::GlmFamily fam = family_of(family);
    data->data.validate(fam.kind());
    auto h = glmd::observed_hessian(fam, data->data, beta_of(beta, data->data.p(), "beta"));
    std::memcpy(out, h.data().data(), sizeof(double) * h.data().size());
  });
}

glmd_status glmd_fit_mle(glmd_family family, const glmd_dataset* data, const double* init_or_null,
                         const glmd_fit_options* opts_or_null, glmd_fit_result** out) {
  return wrap([&] {
    if (!data || !out) throw glmd::ArgumentError("data and out must not be null");
    glmd::GlmFamily fam = family_of(family);
    data->data.validate(fam.kind());
    std::optional<glmd::BetaVector> init;
    if (init_or_null) init = beta_of(init_or_null, data->data.p(), "init");
    auto fr = std::make_unique<glmd_fit_result>();
    fr->fit = glmd::fit_mle(fam, data->data, init, options_of(opts_or_null));
    *out = fr.release();
  });
}

int glmd_fit_converged(const glmd_fit_result* fit) { return fit && fit->fit.converged ? 1 : 0; }
int32_t glmd_fit_iterations(const glmd_fit_result* fit) { return fit ? fit->fit.iterations : -1; }
double glmd_fit_score_norm(const glmd_fit_result* fit) {
  return fit ? fit->fit.final_score_norm : -1.0;
}
int32_t glmd_fit_dim(const glmd_fit_result* fit) {
  return fit ? static_cast<int32_t>(fit->fit.estimate.size()) : 0;
}

glmd_status glmd_fit_estimate(const glmd_fit_result* fit, double* out) {
  return wrap([&] {
    if (!fit || !out) throw glmd::ArgumentError("fit and out must not be null");
    std::memcpy(out, fit->fit.estimate.data(), sizeof(double) * fit->fit.estimate.size());
  });
}

glmd_status glmd_fit_stderrs(const glmd_fit_result* fit, double* out) {
  return wrap([&] {
    if (!fit || !out) throw glmd::ArgumentError("fit and out must not be null");
    glmd::SpdMatrix inv = glmd::spd_inverse(glmd::cholesky(fit->fit.fisher_at_estimate));
    for (int j = 0; j < inv.dim(); ++j) out[j] = std::sqrt(inv(j, j));
  });
}

void glmd_fit_result_free(glmd_fit_result* fit) { delete fit; }

glmd_status glmd_one_step_update(glmd_family family, const glmd_dataset* data, const double* beta0,
                                 double* out) {
  return wrap([&] {
    if (!data || !out) throw glmd::ArgumentError("data and out must not be null");
    glmd::GlmFamily fam = family_of(family);
    data->data.validate(fam.kind());
    auto b = glmd::one_step_update(fam, data->data, beta_of(beta0, data->data.p(), "beta0"));
    std::memcpy(out, b.data(), sizeof(double) * b.size());
  });
}

glmd_status glmd_distributed_fit(glmd_family family, const glmd_dataset* data, int32_t k,
                                 glmd_method method, glmd_transport transport,
                                 const char* endpoint_or_null,
                                 const glmd_fit_options* opts_or_null,
                                 glmd_distributed_result** out) {
  return wrap([&] {
    if (!data || !out) throw glmd::ArgumentError("data and out must not be null");
    glmd::GlmFamily fam = family_of(family);
    data->data.validate(fam.kind());
    auto shards = glmd::partition_shards(data->data, k);
    glmd::TransportSpec spec;
    spec.mode = transport == GLMD_TRANSPORT_SOCKET ? glmd::TransportMode::socket
                                                   : glmd::TransportMode::in_process;
    if (endpoint_or_null) spec.endpoint = endpoint_or_null;
    auto res = std::make_unique<glmd_distributed_result>();
    res->est =
        glmd::run_distributed(fam, shards, options_of(opts_or_null), method_of(method), spec);
    *out = res.release();
  });
}

int32_t glmd_distributed_dim(const glmd_distributed_result* result) {
  return result ? static_cast<int32_t>(result->est.estimate.size()) : 0;
}

glmd_status glmd_distributed_estimate(const glmd_distributed_result* result, double* out) {
  return wrap([&] {
    if (!result || !out) throw glmd::ArgumentError("result and out must not be null");
    std::memcpy(out, result->est.estimate.data(), sizeof(double) * result->est.estimate.size());
  });
}

int32_t glmd_distributed_rounds(const glmd_distributed_result* result) {
  return result ? result->est.rounds_of_communication : -1;
}

int32_t glmd_distributed_workers(const glmd_distributed_result* result) {
  return result ? static_cast<int32_t>(result->est.local_convergence.size()) : 0;
}

int glmd_distributed_local_converged(const glmd_distributed_result* result, int32_t worker) {
  if (!result || worker < 0 ||
      worker >= static_cast<int32_t>(result->est.local_convergence.size()))
    return -1;
  return result->est.local_convergence[worker] ? 1 : 0;
}

int glmd_distributed_has_global_fisher(const glmd_distributed_result* result) {
  return result && result->est.global_fisher.has_value() ? 1 : 0;
}

glmd_status glmd_distributed_global_fisher(const glmd_distributed_result* result, double* out) {
  return wrap([&] {
    if (!result || !out) throw glmd::ArgumentError("result and out must not be null");
    if (!result->est.global_fisher)
      throw glmd::ArgumentError("this method does not aggregate a global Fisher matrix");
    const auto& e = result->est.global_fisher->entries();
    std::memcpy(out, e.data(), sizeof(double) * e.size());
  });
}

void glmd_distributed_result_free(glmd_distributed_result* result) { delete result; }

namespace {

glmd::ProtocolOptions protocol_options(const glmd_fit_options* opts, double handshake_s,
                                       double round_s) {
  glmd::ProtocolOptions p;
  p.fit = options_of(opts);
  if (handshake_s > 0)
    p.handshake_timeout = glmd::Millis(static_cast<std::int64_t>(handshake_s * 1000));
  if (round_s > 0) p.round_timeout = glmd::Millis(static_cast<std::int64_t>(round_s * 1000));
  return p;
}

}  // namespace

glmd_status glmd_coordinator_run(glmd_family family, int32_t k, glmd_method method,
                                 const char* endpoint, const glmd_fit_options* opts_or_null,
                                 double handshake_timeout_s, double round_timeout_s,
                                 glmd_listening_cb on_listening, void* user_data,
                                 glmd_distributed_result** out) {
  return wrap([&] {
    if (!out || !endpoint) throw glmd::ArgumentError("endpoint and out must not be null");
    if (k < 1) throw glmd::ArgumentError("k must be >= 1");
    glmd::GlmFamily fam = family_of(family);
    glmd::Method m = method_of(method);
    if (m == glmd::Method::global)
      throw glmd::ArgumentError("the global method does not use the coordinator");
    auto listener = glmd::tcp_listen(endpoint);
    if (on_listening) on_listening(listener->address().c_str(), user_data);
    auto res = std::make_unique<glmd_distributed_result>();
    res->est = glmd::coordinator_run(
        fam, k, protocol_options(opts_or_null, handshake_timeout_s, round_timeout_s), m,
        *listener);
    *out = res.release();
  });
}

glmd_status glmd_worker_run(glmd_family family, const glmd_dataset* shard, int32_t worker_id,
                            const char* endpoint, const glmd_fit_options* opts_or_null,
                            double handshake_timeout_s, double round_timeout_s,
                            double* final_estimate_or_null) {
  return wrap([&] {
    if (!shard || !endpoint) throw glmd::ArgumentError("shard and endpoint must not be null");
    if (worker_id < 0) throw glmd::ArgumentError("worker_id must be >= 0");
    glmd::GlmFamily fam = family_of(family);
    shard->data.validate(fam.kind());
    glmd::ProtocolOptions opts =
        protocol_options(opts_or_null, handshake_timeout_s, round_timeout_s);
    auto stream = glmd::tcp_dial(endpoint, opts.handshake_timeout);
    glmd::Shard s{worker_id, shard->data};
    glmd::WorkerOutcome outcome = glmd::worker_run(fam, s, opts, *stream);
    if (final_estimate_or_null)
      std::memcpy(final_estimate_or_null, outcome.final_estimate.data(),
                  sizeof(double) * outcome.final_estimate.size());
  });
}

glmd_status glmd_run_experiment(const char* config_json, const char* output_dir, int32_t jobs) {
  return wrap([&] {
    if (!config_json) throw glmd::ArgumentError("config_json must not be null");
    glmd::ExperimentConfig config = glmd::ExperimentConfig::from_json_text(config_json);
    std::string dir = output_dir ? output_dir : config.output_dir;
    glmd::run_experiment(config, dir, jobs);
  });
}

glmd_status glmd_write_report(const char* output_dir) {
  return wrap([&] {
    if (!output_dir) throw glmd::ArgumentError("output_dir must not be null");
    glmd::write_report(output_dir);
  });
}

glmd_status glmd_casestudy_run(const char* config_json, char** report_json) {
  return wrap([&] {
    if (!config_json || !report_json)
      throw glmd::ArgumentError("config_json and report_json must not be null");
    json j;
    try {
      j = json::parse(config_json);
    } catch (const std::exception& e) {
      throw glmd::ConfigError(std::string("casestudy config is not valid JSON: ") + e.what());
    }
    glmd::CaseStudyConfig config;
    config.input_path = j.at("input").get<std::string>();
    if (j.contains("model")) config.model = glmd::family_from_name(j.at("model").get<std::string>());
    if (j.contains("method"))
      config.method = glmd::method_from_name(j.at("method").get<std::string>());
    if (j.contains("k")) config.k = j.at("k").get<int>();
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("holdout_fraction"))
      config.holdout_fraction = j.at("holdout_fraction").get<double>();
    if (j.contains("trials")) config.trials = j.at("trials").get<int>();
    if (j.contains("linear_features"))
      config.linear_features = j.at("linear_features").get<std::vector<int>>();

    glmd::CaseStudyReport report = glmd::casestudy_run(config);
    json out;
    out["design_columns"] = report.design_columns;
    out["rows"] = report.rows;
    out["mean_auc"] = report.mean_auc;
    out["auc_per_trial"] = report.auc_per_trial;
    out["coefficient_se"] = report.coefficient_se;
    out["estimate"] = report.last_estimate;
    std::string text = out.dump(2);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *report_json = buf;
  });
}

void glmd_string_free(char* s) { std::free(s); }

}  // extern "C"
