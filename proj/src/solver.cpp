#include "glmdist/solver.hpp"

#include <cmath>
#include <limits>

namespace glmd {

namespace {

double max_norm(const BetaVector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// Candidate log-likelihood during step halving; a diverged linear predictor
// counts as -inf so the halving loop backs off instead of aborting.
double loglik_or_ninf(const GlmFamily& family, const Dataset& data, const BetaVector& beta) {
  try {
    return log_likelihood(family, data, beta);
  } catch (const DivergedInputError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

}  // namespace

FitResult fit_mle(const GlmFamily& family, const Dataset& data,
                  const std::optional<BetaVector>& init, const FitOptions& opts) {
  opts.validate();
  const int p = data.p();
  if (data.n() < 1) throw ArgumentError("empty dataset");
  BetaVector beta = init.value_or(BetaVector(p, 0.0));
  if (static_cast<int>(beta.size()) != p) throw ArgumentError("init length does not match p");
  require_finite(beta, "init");

  FitResult result;
  result.local_n = data.n();
  result.loglik_path.push_back(log_likelihood(family, data, beta));

  ScoreFisher sf = score_and_fisher(family, data, beta);
  double snorm = max_norm(sf.score);
  int iter = 0;
  while (snorm > opts.score_tolerance && iter < opts.max_iterations) {
    CholeskyFactor factor;
    try {
      factor = cholesky(sf.fisher);
    } catch (const NotPositiveDefiniteError& e) {
      throw SingularFisherError(std::string("fisher matrix not positive definite at iteration ") +
                                std::to_string(iter) + ": " + e.what());
    }
    BetaVector delta = spd_solve(factor, sf.score);
    double ll = result.loglik_path.back();
    double step = 1.0;
    BetaVector candidate(p);
    double cand_ll = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    // Near the optimum the true per-step gain drops below the roundoff of
    // the log-likelihood sum itself; a decrease within that noise band is
    // not an overshoot, and halving on it would stall the quadratic phase
    // short of the score tolerance.
    const double noise = 1e-12 * (1.0 + std::fabs(ll));
    for (int halving = 0; halving <= opts.step_halving_max; ++halving) {
      for (int j = 0; j < p; ++j) candidate[j] = beta[j] + step * delta[j];
      cand_ll = loglik_or_ninf(family, data, candidate);
      if (cand_ll >= ll - noise) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // Every step length decreases the objective: either roundoff noise at
      // the optimum or divergence that halving could not rescue.
      if (std::isinf(cand_ll))
        throw DivergedInputError("fit_mle: iterate diverged at iteration " + std::to_string(iter));
      break;
    }
    beta = candidate;
    ++iter;
    result.loglik_path.push_back(cand_ll);
    sf = score_and_fisher(family, data, beta);
    snorm = max_norm(sf.score);
  }

  result.estimate = std::move(beta);
  result.converged = snorm <= opts.score_tolerance;
  result.iterations = iter;
  result.final_score_norm = snorm;
  result.fisher_at_estimate = std::move(sf.fisher);
  return result;
}

BetaVector one_step_update(const GlmFamily& family, const Dataset& data, const BetaVector& beta0) {
  require_finite(beta0, "beta0");
  ScoreFisher sf = score_and_fisher(family, data, beta0);
  CholeskyFactor factor;
  try {
    factor = cholesky(sf.fisher);
  } catch (const NotPositiveDefiniteError& e) {
    throw SingularFisherError(std::string("one_step_update: fisher not positive definite: ") +
                              e.what());
  }
  BetaVector delta = spd_solve(factor, sf.score);
  BetaVector out(beta0);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += delta[j];
  return out;
}

}  // namespace glmd
