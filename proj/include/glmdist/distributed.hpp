#pragma once

#include <optional>

#include "glmdist/solver.hpp"
#include "glmdist/transport.hpp"

namespace glmd {

enum class Method : int {
  average = 0,
  aee = 1,
  one_step = 2,
  csl_one_step = 3,
  global = 4,
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);

// Rounds of communication each method takes by construction.
int method_rounds(Method m);

struct DistributedEstimate {
  Method method = Method::average;
  BetaVector estimate;
  // Present exactly when the method aggregates the global Fisher matrix:
  // sum_k F_{n_k}(beta_bar) for one_step, F_n at the estimate for global.
  std::optional<SpdMatrix> global_fisher;
  int rounds_of_communication = 0;
  std::vector<bool> local_convergence;  // length K, worker_id order
};

// beta_bar = sum_k (n_k / n) beta_k, accumulated in worker_id order.
BetaVector weighted_average(const std::vector<FitResult>& fits);

// Fisher-weighted combination of local MLEs:
// [sum_k F_k(beta_k)]^{-1} sum_k F_k(beta_k) beta_k. One round.
DistributedEstimate aee_combine(const std::vector<FitResult>& fits);

// Two-round pipeline: local MLEs -> weighted average -> broadcast ->
// aggregate score/Fisher at the average -> single Fisher-scoring step.
DistributedEstimate one_step_distributed(const GlmFamily& family, const std::vector<Shard>& shards,
                                         const FitOptions& opts, const TransportSpec& transport);

// Same pipeline, but the update scales worker 0's local Fisher:
// beta_bar + (n/n_1) F_{n_1}(beta_bar)^{-1} S_n(beta_bar).
DistributedEstimate csl_one_step(const GlmFamily& family, const std::vector<Shard>& shards,
                                 const FitOptions& opts, const TransportSpec& transport);

// Pooled-data MLE baseline (no communication).
DistributedEstimate global_fit(const GlmFamily& family, const std::vector<Shard>& shards,
                               const FitOptions& opts);

// Uniform entry point used by the harness; dispatches on method.
DistributedEstimate run_distributed(const GlmFamily& family, const std::vector<Shard>& shards,
                                    const FitOptions& opts, Method method,
                                    const TransportSpec& transport);

// Shared aggregation kernels (ascending worker order, pairwise summation).
// The protocol coordinator and the in-memory combiners route through these
// so the two paths agree bitwise.
BetaVector combine_weighted_average(const std::vector<BetaVector>& betas,
                                    const std::vector<std::int64_t>& sizes);
std::vector<double> aggregate_buffers(const std::vector<const double*>& parts, std::size_t width);

}  // namespace glmd
