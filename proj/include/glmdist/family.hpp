#pragma once

#include <string>

#include "glmdist/types.hpp"

namespace glmd {

enum class FamilyFn : int {
  h = 0,
  h_prime = 1,
  u_prime = 2,
  u_double_prime = 3,
  u_triple_prime = 4,
  v = 5,
  w = 6,
};

// Inverse-link / canonical-parameter bundle for one of the three supported
// families. Dispersion is fixed at 1 (Bernoulli and Poisson). All member
// functions are pure; the class is a trivially copyable value.
class GlmFamily {
 public:
  static GlmFamily probit() { return GlmFamily(FamilyKind::probit, false); }
  static GlmFamily logistic() { return GlmFamily(FamilyKind::logistic, true); }
  static GlmFamily poisson() { return GlmFamily(FamilyKind::poisson, true); }
  static GlmFamily make(FamilyKind kind);

  FamilyKind kind() const { return kind_; }
  bool canonical() const { return canonical_; }
  const char* name() const { return family_name(kind_); }
  bool is_bernoulli() const { return kind_ != FamilyKind::poisson; }

  // Mean function (inverse link) and derivative.
  double h(double eta) const;
  double h_prime(double eta) const;

  // Canonical parameter theta = u(eta) and derivatives. For canonical
  // families u is the identity.
  double u(double eta) const;
  double u_prime(double eta) const;
  double u_double_prime(double eta) const;
  double u_triple_prime(double eta) const;

  // Response variance v(eta) and Fisher weight w(eta) = h'(eta)^2 / v(eta).
  double v(double eta) const;
  double w(double eta) const;

  // Cumulant b(theta) evaluated at theta = u(eta); y*u - b is the per-row
  // log-likelihood contribution (the c(y, phi) normalizer is constant in
  // beta and dropped).
  double loglik_term(double y, double eta) const;

  // Bundle used by the row-sweep accumulators: mean, u', weight.
  struct RowEval {
    double mean;
    double u_prime;
    double weight;
  };
  RowEval row_eval(double eta) const;

  void validate_response(const std::vector<double>& y) const;

 private:
  GlmFamily(FamilyKind kind, bool canonical) : kind_(kind), canonical_(canonical) {}
  FamilyKind kind_;
  bool canonical_;
};

// Dispatch on the enumerated function kinds (the C API surface).
double family_eval(const GlmFamily& family, FamilyFn fn, double eta);

// Standard normal CDF / survival / density used by the probit family,
// built on erfc (relative error ~1e-14). CDF and survival values are
// clamped to >= 1e-300 so downstream quotients stay finite.
double normal_cdf(double x);
double normal_sf(double x);
double normal_pdf(double x);

// Poisson linear predictors beyond this saturate exp(); evaluation raises
// DivergedInputError instead of producing infinities.
inline constexpr double kPoissonEtaMax = 700.0;

}  // namespace glmd
