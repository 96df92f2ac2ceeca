#include "glmdist/family.hpp"

#include <cmath>

namespace glmd {

namespace {

constexpr double kTinyProb = 1e-300;
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

inline void check_eta(double eta) {
  if (!std::isfinite(eta)) throw DomainError("linear predictor is not finite");
}

inline double sigmoid(double eta) {
  if (eta >= 0.0) {
    double e = std::exp(-eta);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(eta);
  return e / (1.0 + e);
}

// m(1-m) evaluated without the catastrophic cancellation of the naive form:
// e^-|eta| / (1 + e^-|eta|)^2, floored so it never collapses to zero for
// finite eta (same clamp policy as the probit CDF).
inline double sigmoid_var(double eta) {
  double e = std::exp(-std::fabs(eta));
  double v = e / ((1.0 + e) * (1.0 + e));
  return v < kTinyProb ? kTinyProb : v;
}

// log(1 + exp(eta)) without overflow.
inline double softplus(double eta) {
  if (eta > 0.0) return eta + std::log1p(std::exp(-eta));
  return std::log1p(std::exp(eta));
}

inline double poisson_mean(double eta) {
  if (eta > kPoissonEtaMax)
    throw DivergedInputError("poisson linear predictor exceeds overflow threshold");
  return std::exp(eta);
}

}  // namespace

const char* family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::probit: return "probit";
    case FamilyKind::logistic: return "logistic";
    case FamilyKind::poisson: return "poisson";
  }
  return "?";
}

FamilyKind family_from_name(const std::string& name) {
  if (name == "probit") return FamilyKind::probit;
  if (name == "logistic") return FamilyKind::logistic;
  if (name == "poisson") return FamilyKind::poisson;
  throw ArgumentError("unknown family: " + name);
}

GlmFamily GlmFamily::make(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::probit: return probit();
    case FamilyKind::logistic: return logistic();
    case FamilyKind::poisson: return poisson();
  }
  throw ArgumentError("unknown family kind");
}

double normal_cdf(double x) {
  double c = 0.5 * std::erfc(-x * kInvSqrt2);
  return c < kTinyProb ? kTinyProb : c;
}

double normal_sf(double x) {
  double c = 0.5 * std::erfc(x * kInvSqrt2);
  return c < kTinyProb ? kTinyProb : c;
}

double normal_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double GlmFamily::h(double eta) const {
  check_eta(eta);
  switch (kind_) {
    case FamilyKind::probit: return normal_cdf(eta);
    case FamilyKind::logistic: return sigmoid(eta);
    case FamilyKind::poisson: return poisson_mean(eta);
  }
  return 0.0;
}

double GlmFamily::h_prime(double eta) const {
  check_eta(eta);
  switch (kind_) {
    case FamilyKind::probit: return normal_pdf(eta);
    case FamilyKind::logistic: return sigmoid_var(eta);
    case FamilyKind::poisson: return poisson_mean(eta);
  }
  return 0.0;
}

double GlmFamily::u(double eta) const {
  check_eta(eta);
  if (canonical_) return eta;
  // probit: theta = logit(Phi(eta))
  double cdf = normal_cdf(eta);
  double sf = normal_sf(eta);
  return std::log(cdf) - std::log(sf);
}

double GlmFamily::u_prime(double eta) const {
  check_eta(eta);
  if (canonical_) return 1.0;
  return normal_pdf(eta) / (normal_cdf(eta) * normal_sf(eta));
}

double GlmFamily::u_double_prime(double eta) const {
  check_eta(eta);
  if (canonical_) return 0.0;
  double pdf = normal_pdf(eta);
  double cdf = normal_cdf(eta);
  double sf = normal_sf(eta);
  double var = cdf * sf;
  double one_minus_two = sf - cdf;  // 1 - 2*Phi
  return -eta * pdf / var - pdf * pdf * one_minus_two / (var * var);
}

double GlmFamily::u_triple_prime(double eta) const {
  check_eta(eta);
  if (canonical_) return 0.0;
  double pdf = normal_pdf(eta);
  double cdf = normal_cdf(eta);
  double sf = normal_sf(eta);
  double var = cdf * sf;
  double omt = sf - cdf;  // 1 - 2*Phi
  double var2 = var * var;
  return (eta * eta - 1.0) * pdf / var + 3.0 * eta * pdf * pdf * omt / var2 +
         2.0 * pdf * pdf * pdf / var2 + 2.0 * pdf * pdf * pdf * omt * omt / (var2 * var);
}

double GlmFamily::v(double eta) const {
  check_eta(eta);
  switch (kind_) {
    case FamilyKind::probit: return normal_cdf(eta) * normal_sf(eta);
    case FamilyKind::logistic: return sigmoid_var(eta);
    case FamilyKind::poisson: {
      double m = poisson_mean(eta);
      return m < kTinyProb ? kTinyProb : m;
    }
  }
  return 0.0;
}

double GlmFamily::w(double eta) const {
  check_eta(eta);
  switch (kind_) {
    case FamilyKind::probit: {
      double pdf = normal_pdf(eta);
      double wt = pdf * pdf / (normal_cdf(eta) * normal_sf(eta));
      return wt < kTinyProb ? kTinyProb : wt;
    }
    case FamilyKind::logistic:
      // (h')^2 / v collapses to v for the canonical link.
      return sigmoid_var(eta);
    case FamilyKind::poisson: {
      double m = poisson_mean(eta);
      return m < kTinyProb ? kTinyProb : m;
    }
  }
  return 0.0;
}

double GlmFamily::loglik_term(double y, double eta) const {
  check_eta(eta);
  switch (kind_) {
    case FamilyKind::probit:
      return y * std::log(normal_cdf(eta)) + (1.0 - y) * std::log(normal_sf(eta));
    case FamilyKind::logistic:
      return y * eta - softplus(eta);
    case FamilyKind::poisson:
      return y * eta - poisson_mean(eta);
  }
  return 0.0;
}

GlmFamily::RowEval GlmFamily::row_eval(double eta) const {
  check_eta(eta);
  switch (kind_) {
    case FamilyKind::probit: {
      double pdf = normal_pdf(eta);
      double cdf = normal_cdf(eta);
      double var = cdf * normal_sf(eta);
      double wt = pdf * pdf / var;
      return {cdf, pdf / var, wt < kTinyProb ? kTinyProb : wt};
    }
    case FamilyKind::logistic: {
      return {sigmoid(eta), 1.0, sigmoid_var(eta)};
    }
    case FamilyKind::poisson: {
      double m = poisson_mean(eta);
      return {m, 1.0, m < kTinyProb ? kTinyProb : m};
    }
  }
  return {0.0, 0.0, 0.0};
}

void GlmFamily::validate_response(const std::vector<double>& y) const {
  for (std::size_t i = 0; i < y.size(); ++i) {
    double yi = y[i];
    if (!std::isfinite(yi)) throw DomainError("response contains a non-finite value");
    if (is_bernoulli()) {
      if (yi != 0.0 && yi != 1.0)
        throw ArgumentError("bernoulli response must be 0 or 1 at row " + std::to_string(i));
    } else {
      if (yi < 0.0 || yi != std::floor(yi))
        throw ArgumentError("poisson response must be a non-negative integer at row " +
                            std::to_string(i));
    }
  }
}

double family_eval(const GlmFamily& family, FamilyFn fn, double eta) {
  switch (fn) {
    case FamilyFn::h: return family.h(eta);
    case FamilyFn::h_prime: return family.h_prime(eta);
    case FamilyFn::u_prime: return family.u_prime(eta);
    case FamilyFn::u_double_prime: return family.u_double_prime(eta);
    case FamilyFn::u_triple_prime: return family.u_triple_prime(eta);
    case FamilyFn::v: return family.v(eta);
    case FamilyFn::w: return family.w(eta);
  }
  throw ArgumentError("unknown family function kind");
}

}  // namespace glmd
