#pragma once

#include <optional>

#include "glmdist/glm.hpp"

namespace glmd {

struct FitOptions {
  int max_iterations = 50;
  double score_tolerance = 1e-8;  // threshold on the max-norm of the score
  int step_halving_max = 10;

  void validate() const {
    if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
    if (!(score_tolerance > 0)) throw ArgumentError("score_tolerance must be > 0");
    if (step_halving_max < 0) throw ArgumentError("step_halving_max must be >= 0");
  }
};

struct FitResult {
  BetaVector estimate;
  bool converged = false;
  int iterations = 0;
  double final_score_norm = 0.0;
  SpdMatrix fisher_at_estimate;
  std::int64_t local_n = 0;
  // Log-likelihood after each accepted iterate, starting at the initial
  // point. Non-decreasing by construction (step halving).
  std::vector<double> loglik_path;
};

// Iterative Fisher scoring: beta <- beta + F(beta)^-1 S(beta), halving the
// step while the log-likelihood fails to increase, stopping when the score
// max-norm falls at or below score_tolerance or the iteration cap is hit.
// The fit starts from `init` when given, otherwise from the zero vector.
FitResult fit_mle(const GlmFamily& family, const Dataset& data,
                  const std::optional<BetaVector>& init, const FitOptions& opts);

// A single raw Fisher-scoring step from beta0: no halving, no convergence
// test.
BetaVector one_step_update(const GlmFamily& family, const Dataset& data, const BetaVector& beta0);

}  // namespace glmd
