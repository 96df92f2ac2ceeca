#include <doctest.h>

#include <cmath>
#include <cstring>

#include "glmdist/solver.hpp"
#include "oracles.hpp"

using namespace glmd;

namespace {

double max_abs_diff(const BetaVector& a, const BetaVector& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::fabs(a[j] - b[j]));
  return m;
}

Dataset synthetic(const GlmFamily& family, std::int64_t n, const BetaVector& beta0,
                  std::uint64_t seed) {
  auto& rng = oracle::test_rng(seed);
  const int p = static_cast<int>(beta0.size());
  Dataset data;
  data.design = Matrix(n, p);
  data.response.resize(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::int64_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (int j = 0; j < p; ++j) {
      data.design(i, j) = oracle::std_normal(rng);
      eta += data.design(i, j) * beta0[j];
    }
    if (family.is_bernoulli()) {
      data.response[i] = unif(rng) < family.h(eta) ? 1.0 : 0.0;
    } else {
      std::poisson_distribution<long> pois(family.h(eta));
      data.response[i] = static_cast<double>(pois(rng));
    }
  }
  return data;
}

}  // namespace

TEST_CASE("balanced intercept-only logistic fit converges at zero") {
  Dataset d{Matrix(2, 1, {1.0, 1.0}), {0.0, 1.0}};
  auto fit = fit_mle(GlmFamily::logistic(), d, std::nullopt, {});
  CHECK(fit.converged);
  CHECK(std::fabs(fit.estimate[0]) <= 1e-8);
}

TEST_CASE("intercept-only poisson MLE is log of the mean") {
  Dataset d{Matrix(3, 1, {1.0, 1.0, 1.0}), {2.0, 3.0, 1.0}};
  auto fit = fit_mle(GlmFamily::poisson(), d, std::nullopt, {});
  CHECK(fit.converged);
  CHECK(fit.estimate[0] == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("probit fit matches a refining grid search of the log-likelihood") {
  GlmFamily probit = GlmFamily::probit();
  Dataset data = synthetic(probit, 200, {0.3, -0.4}, 321);
  auto fit = fit_mle(probit, data, std::nullopt, {});
  REQUIRE(fit.converged);

  // Coarse-to-fine grid maximizer, legitimate for a concave objective:
  // shrink a bracketing box around the best cell down to 1e-4 spacing.
  double lo0 = -2.0, hi0 = 2.0, lo1 = -2.0, hi1 = 2.0;
  double best0 = 0.0, best1 = 0.0;
  for (double step = 0.05; step >= 1e-4 / 2; step /= 5) {
    double best = -1e300;
    for (double b0 = lo0; b0 <= hi0 + 1e-15; b0 += step)
      for (double b1 = lo1; b1 <= hi1 + 1e-15; b1 += step) {
        double ll = log_likelihood(probit, data, {b0, b1});
        if (ll > best) {
          best = ll;
          best0 = b0;
          best1 = b1;
        }
      }
    lo0 = best0 - 2 * step;
    hi0 = best0 + 2 * step;
    lo1 = best1 - 2 * step;
    hi1 = best1 + 2 * step;
  }
  CHECK(std::fabs(fit.estimate[0] - best0) <= 1e-4);
  CHECK(std::fabs(fit.estimate[1] - best1) <= 1e-4);
}

TEST_CASE("fit result invariants hold") {
  GlmFamily logistic = GlmFamily::logistic();
  Dataset data = synthetic(logistic, 120, {-0.25, 0.25, -0.25}, 11);
  FitOptions opts;
  auto fit = fit_mle(logistic, data, std::nullopt, opts);
  REQUIRE(fit.converged);
  CHECK(fit.final_score_norm <= opts.score_tolerance);
  CHECK(fit.local_n == 120);
  // fisher_at_estimate is the Fisher matrix at the estimate
  auto f = fisher_info(logistic, data, fit.estimate);
  CHECK(std::memcmp(f.entries().data(), fit.fisher_at_estimate.entries().data(),
                    sizeof(double) * f.entries().size()) == 0);
  // recorded log-likelihood path is non-decreasing (up to the summation
  // roundoff the halving rule itself tolerates)
  for (std::size_t i = 1; i < fit.loglik_path.size(); ++i)
    CHECK(fit.loglik_path[i] >=
          fit.loglik_path[i - 1] - 1e-12 * (1.0 + std::fabs(fit.loglik_path[i - 1])));
}

TEST_CASE("one-step update from the MLE stays at the MLE") {
  GlmFamily probit = GlmFamily::probit();
  Dataset data = synthetic(probit, 150, {0.2, -0.1}, 77);
  FitOptions opts;
  auto fit = fit_mle(probit, data, std::nullopt, opts);
  REQUIRE(fit.converged);
  auto [lmin, lmax] = eigen_extremes(fit.fisher_at_estimate, 1e-8);
  auto stepped = one_step_update(probit, data, fit.estimate);
  CHECK(max_abs_diff(stepped, fit.estimate) <= 100 * opts.score_tolerance / lmin);
}

TEST_CASE("poisson intercept-only one-step hand arithmetic") {
  // S(0) = (1 - 1) + (3 - 1) = 2, F(0) = 2, so the step lands on 1.
  Dataset d{Matrix(2, 1, {1.0, 1.0}), {1.0, 3.0}};
  auto b = one_step_update(GlmFamily::poisson(), d, {0.0});
  CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("one-step update equals F^-1 S computed by the elimination oracle") {
  GlmFamily logistic = GlmFamily::logistic();
  Dataset data = synthetic(logistic, 8, {0.3, -0.2}, 55);
  BetaVector beta0{0.45, -0.05};
  auto stepped = one_step_update(logistic, data, beta0);
  auto f = fisher_info(logistic, data, beta0);
  auto s = score(logistic, data, beta0);
  std::vector<std::vector<double>> rows(2, std::vector<double>(2));
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) rows[a][b] = f(a, b);
  auto delta = oracle::solve_gauss(rows, s);
  for (int j = 0; j < 2; ++j)
    CHECK(stepped[j] == doctest::Approx(beta0[j] + delta[j]).epsilon(1e-10));
}

TEST_CASE("newton and fisher scoring steps coincide bit for bit on canonical links") {
  for (auto family : {GlmFamily::logistic(), GlmFamily::poisson()}) {
    Dataset data = synthetic(family, 40, {0.2, -0.3}, 91 + static_cast<int>(family.kind()));
    BetaVector beta{0.05, 0.05};
    auto s = score(family, data, beta);
    auto f = fisher_info(family, data, beta);
    auto h = observed_hessian(family, data, beta);
    std::vector<double> negh(4);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) negh[a * 2 + b] = -h(a, b);
    auto fisher_step = spd_solve(cholesky(f), s);
    auto newton_step = spd_solve(cholesky(SpdMatrix(2, negh)), s);
    CHECK(std::memcmp(fisher_step.data(), newton_step.data(), sizeof(double) * 2) == 0);
  }
}

TEST_CASE("rescaling a design column rescales that coordinate of the MLE") {
  GlmFamily logistic = GlmFamily::logistic();
  Dataset data = synthetic(logistic, 160, {0.4, -0.3}, 101);
  auto fit = fit_mle(logistic, data, std::nullopt, {});
  REQUIRE(fit.converged);
  const double c = 2.5;
  Dataset scaled = data;
  for (std::int64_t i = 0; i < scaled.n(); ++i) scaled.design(i, 1) *= c;
  auto fit2 = fit_mle(logistic, scaled, std::nullopt, {});
  REQUIRE(fit2.converged);
  CHECK(fit2.estimate[0] == doctest::Approx(fit.estimate[0]).epsilon(1e-8));
  CHECK(fit2.estimate[1] == doctest::Approx(fit.estimate[1] / c).epsilon(1e-8));
}

TEST_CASE("iteration cap reports non-convergence instead of throwing") {
  GlmFamily probit = GlmFamily::probit();
  Dataset data = synthetic(probit, 300, {0.3, -0.4, 0.2}, 13);
  FitOptions opts;
  opts.max_iterations = 1;
  auto fit = fit_mle(probit, data, std::nullopt, opts);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 1);
}

TEST_CASE("perfectly separated logistic data hits the iteration cap") {
  // One covariate separating the classes exactly: the MLE runs away and the
  // iterate grows by a bounded amount per Fisher step, so the cap fires
  // first and leaves a finite estimate.
  Dataset d{Matrix(6, 1, {-0.2, -0.15, -0.1, 0.1, 0.15, 0.2}), {0, 0, 0, 1, 1, 1}};
  FitOptions opts;
  opts.max_iterations = 12;
  auto fit = fit_mle(GlmFamily::logistic(), d, std::nullopt, opts);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 12);
  CHECK(std::isfinite(fit.estimate[0]));
}

TEST_CASE("bad options are rejected") {
  Dataset d{Matrix(1, 1, {1.0}), {1.0}};
  FitOptions opts;
  opts.max_iterations = 0;
  CHECK_THROWS_AS(fit_mle(GlmFamily::logistic(), d, std::nullopt, opts), ArgumentError);
}
