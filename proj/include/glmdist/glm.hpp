#pragma once

#include "glmdist/family.hpp"
#include "glmdist/linalg.hpp"
#include "glmdist/types.hpp"

namespace glmd {

// Sum_i [y_i u(z_i'b) - b(u(z_i'b))] with dispersion 1; the c(y, phi)
// normalizer is omitted (constant in beta).
double log_likelihood(const GlmFamily& family, const Dataset& data, const BetaVector& beta);

// Sum_i z_i u'(z_i'b) [y_i - h(z_i'b)].
BetaVector score(const GlmFamily& family, const Dataset& data, const BetaVector& beta);

// Sum_i z_i w(z_i'b) z_i'. Assembled on the upper triangle and mirrored, so
// the result is symmetric to bit equality.
SpdMatrix fisher_info(const GlmFamily& family, const Dataset& data, const BetaVector& beta);

// R_n(b) - F_n(b); for canonical families this is exactly -fisher_info.
Matrix observed_hessian(const GlmFamily& family, const Dataset& data, const BetaVector& beta);

// One row sweep producing both the score and the Fisher information. Each
// output is accumulated with the same pairwise tree as the standalone
// functions, so the results are bit-identical to separate calls.
struct ScoreFisher {
  BetaVector score;
  SpdMatrix fisher;
};
ScoreFisher score_and_fisher(const GlmFamily& family, const Dataset& data, const BetaVector& beta);

}  // namespace glmd
