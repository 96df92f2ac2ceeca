#include <doctest.h>

#include <cmath>
#include <limits>

#include "glmdist/family.hpp"
#include "oracles.hpp"

using namespace glmd;

namespace {

const double kEtaProbes[] = {-8.0, -3.2, -1.0, -0.3, 0.0, 0.4, 1.7, 2.9, 6.0};

double ulp_diff(double a, double b) {
  if (a == b) return 0.0;
  double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) / (scale * std::numeric_limits<double>::epsilon());
}

}  // namespace

TEST_CASE("logistic h at zero is one half") {
  CHECK(family_eval(GlmFamily::logistic(), FamilyFn::h, 0.0) == 0.5);
}

TEST_CASE("poisson weight at zero is one") {
  CHECK(family_eval(GlmFamily::poisson(), FamilyFn::w, 0.0) == 1.0);
}

TEST_CASE("probit weight at zero equals 2/pi") {
  // phi(0)^2 / (Phi(0)(1-Phi(0))) = (1/sqrt(2 pi))^2 / 0.25, i.e. 2/pi,
  // 0.6366197723675813 to 16 digits.
  double w = family_eval(GlmFamily::probit(), FamilyFn::w, 0.0);
  CHECK(w == doctest::Approx(0.6366197723675813).epsilon(1e-14));
}

TEST_CASE("weight identity w = h'^2 / v within 4 ulp") {
  for (auto family : {GlmFamily::probit(), GlmFamily::logistic(), GlmFamily::poisson()}) {
    for (double eta : kEtaProbes) {
      double direct = family.h_prime(eta) * family.h_prime(eta) / family.v(eta);
      CHECK(ulp_diff(family.w(eta), direct) <= 4.0);
    }
  }
}

TEST_CASE("canonical families have identity u") {
  for (auto family : {GlmFamily::logistic(), GlmFamily::poisson()}) {
    CHECK(family.canonical());
    for (double eta : kEtaProbes) {
      CHECK(family.u(eta) == eta);
      CHECK(family.u_prime(eta) == 1.0);
      CHECK(family.u_double_prime(eta) == 0.0);
      CHECK(family.u_triple_prime(eta) == 0.0);
    }
  }
  CHECK_FALSE(GlmFamily::probit().canonical());
}

TEST_CASE("inverse links are strictly increasing") {
  for (auto family : {GlmFamily::probit(), GlmFamily::logistic(), GlmFamily::poisson()}) {
    double prev = family.h(kEtaProbes[0]);
    for (std::size_t i = 1; i < std::size(kEtaProbes); ++i) {
      double cur = family.h(kEtaProbes[i]);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("variance and weight stay strictly positive, even far in the tails") {
  for (auto family : {GlmFamily::probit(), GlmFamily::logistic(), GlmFamily::poisson()}) {
    for (double eta : {-40.0, -12.0, 0.0, 12.0, 40.0}) {
      if (family.kind() == FamilyKind::poisson && eta > 30) continue;
      CHECK(family.v(eta) > 0.0);
      CHECK(std::isfinite(family.v(eta)));
      CHECK(family.w(eta) >= 0.0);
      CHECK(std::isfinite(family.w(eta)));
      CHECK(std::isfinite(family.u_prime(eta)));
    }
  }
}

TEST_CASE("probit u derivatives agree with finite differences") {
  GlmFamily probit = GlmFamily::probit();
  for (double eta : {-2.0, -0.7, 0.0, 0.9, 2.4}) {
    double h = 1e-5;
    double fd_upp = (probit.u_prime(eta + h) - probit.u_prime(eta - h)) / (2 * h);
    CHECK(probit.u_double_prime(eta) == doctest::Approx(fd_upp).epsilon(1e-6));
    double fd_uppp = (probit.u_double_prime(eta + h) - probit.u_double_prime(eta - h)) / (2 * h);
    CHECK(probit.u_triple_prime(eta) == doctest::Approx(fd_uppp).epsilon(1e-6));
  }
}

TEST_CASE("probit tails carry clamped, finite values") {
  GlmFamily probit = GlmFamily::probit();
  for (double eta : {-60.0, 60.0}) {
    CHECK(std::isfinite(probit.h(eta)));
    CHECK(std::isfinite(probit.w(eta)));
    CHECK(std::isfinite(probit.u_prime(eta)));
    CHECK(probit.v(eta) > 0.0);
  }
}

TEST_CASE("non-finite linear predictors are rejected") {
  for (auto family : {GlmFamily::probit(), GlmFamily::logistic(), GlmFamily::poisson()}) {
    CHECK_THROWS_AS(family.h(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(family.w(std::numeric_limits<double>::infinity()), DomainError);
  }
}

TEST_CASE("poisson linear predictor overflow raises diverged-input") {
  CHECK_THROWS_AS(GlmFamily::poisson().h(701.0), DivergedInputError);
  CHECK_NOTHROW(GlmFamily::poisson().h(699.0));
}

TEST_CASE("response validation per family") {
  CHECK_NOTHROW(GlmFamily::logistic().validate_response({0, 1, 1, 0}));
  CHECK_THROWS_AS(GlmFamily::logistic().validate_response({0, 0.5}), ArgumentError);
  CHECK_NOTHROW(GlmFamily::poisson().validate_response({0, 3, 17}));
  CHECK_THROWS_AS(GlmFamily::poisson().validate_response({-1}), ArgumentError);
  CHECK_THROWS_AS(GlmFamily::poisson().validate_response({2.5}), ArgumentError);
}
