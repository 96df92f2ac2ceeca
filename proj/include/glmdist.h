/* glmdist: distributed maximum-likelihood estimation for generalized linear
 * models. C interface over the C++ core: opaque handles, status codes, and
 * a thread-local error message for the last failing call. */
#ifndef GLMDIST_H
#define GLMDIST_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  GLMD_OK = 0,
  GLMD_ERR_ARGUMENT = 1,
  GLMD_ERR_DOMAIN = 2,
  GLMD_ERR_DIVERGED = 3,
  GLMD_ERR_NOT_POSITIVE_DEFINITE = 4,
  GLMD_ERR_SINGULAR_FISHER = 5,
  GLMD_ERR_CONVERGENCE = 6,
  GLMD_ERR_TRANSPORT = 7,
  GLMD_ERR_PROTOCOL = 8,
  GLMD_ERR_DEGENERATE_KNOTS = 9,
  GLMD_ERR_IO = 10,
  GLMD_ERR_CONFIG = 11,
  GLMD_ERR_INTERNAL = 12
} glmd_status;

typedef enum {
  GLMD_FAMILY_PROBIT = 0,
  GLMD_FAMILY_LOGISTIC = 1,
  GLMD_FAMILY_POISSON = 2
} glmd_family;

typedef enum {
  GLMD_METHOD_AVERAGE = 0,
  GLMD_METHOD_AEE = 1,
  GLMD_METHOD_ONE_STEP = 2,
  GLMD_METHOD_CSL_ONE_STEP = 3,
  GLMD_METHOD_GLOBAL = 4
} glmd_method;

typedef enum {
  GLMD_TRANSPORT_IN_PROCESS = 0,
  GLMD_TRANSPORT_SOCKET = 1
} glmd_transport;

typedef enum {
  GLMD_FN_H = 0,
  GLMD_FN_H_PRIME = 1,
  GLMD_FN_U_PRIME = 2,
  GLMD_FN_U_DOUBLE_PRIME = 3,
  GLMD_FN_U_TRIPLE_PRIME = 4,
  GLMD_FN_V = 5,
  GLMD_FN_W = 6
} glmd_family_fn;

const char* glmd_version(void);

/* Message describing the most recent failure on this thread. */
const char* glmd_last_error(void);

typedef struct glmd_dataset glmd_dataset;
typedef struct glmd_fit_result glmd_fit_result;
typedef struct glmd_distributed_result glmd_distributed_result;

typedef struct {
  int32_t max_iterations;   /* default 50 */
  double score_tolerance;   /* default 1e-8, max-norm of the score */
  int32_t step_halving_max; /* default 10 */
} glmd_fit_options;

void glmd_fit_options_init(glmd_fit_options* opts);

/* ---- family functions ---- */

glmd_status glmd_family_eval(glmd_family family, glmd_family_fn fn, double eta, double* out);

/* ---- datasets ---- */

glmd_status glmd_dataset_create(int64_t n, int32_t p, const double* design_row_major,
                                const double* response, glmd_dataset** out);

/* One simulated trial: AR(1) covariates with correlation rho, responses from
 * the alternating true coefficient vector. The dataset is the concatenation
 * of k_shards seed-derived shards. */
glmd_status glmd_dataset_simulate(glmd_family family, int64_t n, int32_t p, double rho,
                                  uint64_t base_seed, uint64_t trial, int32_t k_shards,
                                  glmd_dataset** out);

/* Regenerate only shard `worker_id` of the simulated trial above. */
glmd_status glmd_dataset_simulate_shard(glmd_family family, int64_t n, int32_t p, double rho,
                                        uint64_t base_seed, uint64_t trial, int32_t k_shards,
                                        int32_t worker_id, glmd_dataset** out);

/* "response,feature1,...,featureP" lines; optional leading intercept column
 * of ones. */
glmd_status glmd_dataset_from_csv(const char* path, int add_intercept, glmd_dataset** out);

/* Rows [row_begin, row_end) of an existing dataset. */
glmd_status glmd_dataset_slice(const glmd_dataset* data, int64_t row_begin, int64_t row_end,
                               glmd_dataset** out);

int64_t glmd_dataset_rows(const glmd_dataset* data);
int32_t glmd_dataset_cols(const glmd_dataset* data);
void glmd_dataset_free(glmd_dataset* data);

/* ---- likelihood, score, information ---- */

glmd_status glmd_log_likelihood(glmd_family family, const glmd_dataset* data, const double* beta,
                                double* out);
glmd_status glmd_score(glmd_family family, const glmd_dataset* data, const double* beta,
                       double* out /* length p */);
glmd_status glmd_fisher_info(glmd_family family, const glmd_dataset* data, const double* beta,
                             double* out /* p*p row-major */);
glmd_status glmd_observed_hessian(glmd_family family, const glmd_dataset* data, const double* beta,
                                  double* out /* p*p row-major */);

/* ---- fitting ---- */

glmd_status glmd_fit_mle(glmd_family family, const glmd_dataset* data,
                         const double* init_or_null, const glmd_fit_options* opts_or_null,
                         glmd_fit_result** out);
int glmd_fit_converged(const glmd_fit_result* fit);
int32_t glmd_fit_iterations(const glmd_fit_result* fit);
double glmd_fit_score_norm(const glmd_fit_result* fit);
int32_t glmd_fit_dim(const glmd_fit_result* fit);
glmd_status glmd_fit_estimate(const glmd_fit_result* fit, double* out /* length p */);
/* Wald standard errors: sqrt of the diagonal of the inverse Fisher matrix
 * at the estimate. */
glmd_status glmd_fit_stderrs(const glmd_fit_result* fit, double* out /* length p */);
void glmd_fit_result_free(glmd_fit_result* fit);

/* Single Fisher-scoring step from beta0 (no halving, no convergence test). */
glmd_status glmd_one_step_update(glmd_family family, const glmd_dataset* data,
                                 const double* beta0, double* out /* length p */);

/* ---- distributed estimation ---- */

/* Split `data` into k contiguous shards and run the requested estimator.
 * endpoint_or_null selects the listen address in socket mode (default
 * 127.0.0.1: ephemeral). */
glmd_status glmd_distributed_fit(glmd_family family, const glmd_dataset* data, int32_t k,
                                 glmd_method method, glmd_transport transport,
                                 const char* endpoint_or_null,
                                 const glmd_fit_options* opts_or_null,
                                 glmd_distributed_result** out);

int32_t glmd_distributed_dim(const glmd_distributed_result* result);
glmd_status glmd_distributed_estimate(const glmd_distributed_result* result,
                                      double* out /* length p */);
int32_t glmd_distributed_rounds(const glmd_distributed_result* result);
int32_t glmd_distributed_workers(const glmd_distributed_result* result);
/* 1 if worker's local fit converged, 0 otherwise; -1 on bad index. */
int glmd_distributed_local_converged(const glmd_distributed_result* result, int32_t worker);
int glmd_distributed_has_global_fisher(const glmd_distributed_result* result);
glmd_status glmd_distributed_global_fisher(const glmd_distributed_result* result,
                                           double* out /* p*p row-major */);
void glmd_distributed_result_free(glmd_distributed_result* result);

/* ---- coordinator / worker services ---- */

typedef void (*glmd_listening_cb)(const char* address, void* user_data);

/* Listen on `endpoint` ("host:port"; port 0 picks an ephemeral port reported
 * through on_listening), run the two-round exchange with k workers, return
 * the combined result. Timeouts in seconds; pass 0 for the defaults (30 s
 * handshake, 300 s per round). */
glmd_status glmd_coordinator_run(glmd_family family, int32_t k, glmd_method method,
                                 const char* endpoint, const glmd_fit_options* opts_or_null,
                                 double handshake_timeout_s, double round_timeout_s,
                                 glmd_listening_cb on_listening, void* user_data,
                                 glmd_distributed_result** out);

/* Serve one shard: connect to the coordinator, run the worker state
 * machine, and (optionally) return the final broadcast estimate. */
glmd_status glmd_worker_run(glmd_family family, const glmd_dataset* shard, int32_t worker_id,
                            const char* endpoint, const glmd_fit_options* opts_or_null,
                            double handshake_timeout_s, double round_timeout_s,
                            double* final_estimate_or_null /* length p */);

/* ---- experiment harness / case study ---- */

/* config_json schema: {"model","n","p_list","k_list","trials","rho",
 * "base_seed","methods","output_dir"?,"fit"?}. Writes per-cell archive CSVs,
 * metrics.csv, summary.csv and the effective config.json under output_dir.
 * jobs <= 0 uses all hardware threads. */
glmd_status glmd_run_experiment(const char* config_json, const char* output_dir, int32_t jobs);

/* Recompute metrics.csv and summary.csv from the archives in output_dir. */
glmd_status glmd_write_report(const char* output_dir);

/* config_json schema: {"input","model"?,"method"?,"k"?,"seed"?,
 * "holdout_fraction"?,"trials"?,"linear_features"?}. On success *report_json
 * receives a malloc'd JSON report (free with glmd_string_free). */
glmd_status glmd_casestudy_run(const char* config_json, char** report_json);

void glmd_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* GLMDIST_H */
