#include <doctest.h>

#include <cmath>
#include <cstring>

#include "glmdist/datagen.hpp"
#include "glmdist/distributed.hpp"
#include "oracles.hpp"

using namespace glmd;

namespace {

double max_abs_diff(const BetaVector& a, const BetaVector& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::fabs(a[j] - b[j]));
  return m;
}

FitResult fake_fit(BetaVector beta, std::vector<double> fisher, std::int64_t n) {
  FitResult f;
  f.estimate = std::move(beta);
  f.converged = true;
  f.fisher_at_estimate = SpdMatrix(static_cast<int>(f.estimate.size()), std::move(fisher));
  f.local_n = n;
  return f;
}

std::vector<Shard> sim_shards(FamilyKind kind, std::int64_t n, int p, int k, std::uint64_t seed,
                              double rho = 0.75) {
  GlmFamily family = GlmFamily::make(kind);
  SimDesign design{kind, n, p, rho, seed, k};
  return gen_trial_shards(family, design, true_beta(kind, p), 0);
}

}  // namespace

TEST_CASE("weighted average: single fit, hand arithmetic, random oracle") {
  auto single = weighted_average({fake_fit({1.5, -2.0}, {1, 0, 0, 1}, 10)});
  CHECK(single == BetaVector{1.5, -2.0});

  auto two = weighted_average(
      {fake_fit({0.0}, {1}, 1), fake_fit({4.0}, {1}, 3)});
  CHECK(two[0] == doctest::Approx(3.0).epsilon(1e-15));

  auto& rng = oracle::test_rng(2024);
  std::vector<FitResult> fits;
  std::vector<std::int64_t> sizes{11, 7, 23, 5, 17};
  for (int k = 0; k < 5; ++k) {
    BetaVector b{oracle::std_normal(rng), oracle::std_normal(rng)};
    fits.push_back(fake_fit(b, {1, 0, 0, 1}, sizes[k]));
  }
  auto combined = weighted_average(fits);
  double n = 11 + 7 + 23 + 5 + 17;
  for (int j = 0; j < 2; ++j) {
    double want = 0.0;
    for (int k = 0; k < 5; ++k)
      want += static_cast<double>(sizes[k]) / n * fits[k].estimate[j];
    CHECK(std::fabs(combined[j] - want) <= 1e-15);
  }
}

TEST_CASE("aee_combine reduces to the local MLE for a single client") {
  auto fit = fake_fit({0.6, -0.3}, {4, 1, 1, 3}, 50);
  auto est = aee_combine({fit});
  CHECK(est.method == Method::aee);
  CHECK(est.rounds_of_communication == 1);
  CHECK(max_abs_diff(est.estimate, fit.estimate) <= 1e-12);
  CHECK_FALSE(est.global_fisher.has_value());
}

TEST_CASE("aee_combine is a fixed point when all locals agree") {
  BetaVector star{0.25, -0.75};
  std::vector<FitResult> fits;
  fits.push_back(fake_fit(star, {5, 1, 1, 2}, 10));
  fits.push_back(fake_fit(star, {1, 0, 0, 9}, 30));
  fits.push_back(fake_fit(star, {3, -1, -1, 4}, 20));
  auto est = aee_combine(fits);
  CHECK(max_abs_diff(est.estimate, star) <= 1e-12);
}

TEST_CASE("aee_combine matches explicit 2x2 matrix arithmetic") {
  std::vector<FitResult> fits;
  fits.push_back(fake_fit({1.0, 2.0}, {2, 0.5, 0.5, 1}, 12));
  fits.push_back(fake_fit({-1.0, 0.5}, {1, -0.25, -0.25, 3}, 20));
  auto est = aee_combine(fits);

  std::vector<std::vector<double>> agg{{3, 0.25}, {0.25, 4}};
  std::vector<double> rhs(2, 0.0);
  // F1 b1 + F2 b2
  rhs[0] = (2 * 1.0 + 0.5 * 2.0) + (1 * -1.0 + -0.25 * 0.5);
  rhs[1] = (0.5 * 1.0 + 1 * 2.0) + (-0.25 * -1.0 + 3 * 0.5);
  auto want = oracle::solve_gauss(agg, rhs);
  CHECK(max_abs_diff(est.estimate, want) <= 1e-12);
}

TEST_CASE("aee equals the weighted average when fishers are scaled identities") {
  std::vector<FitResult> fits;
  std::vector<std::int64_t> sizes{8, 24, 16};
  std::int64_t n = 48;
  auto& rng = oracle::test_rng(31415);
  for (int k = 0; k < 3; ++k) {
    double w = static_cast<double>(sizes[k]) / static_cast<double>(n);
    BetaVector b{oracle::std_normal(rng), oracle::std_normal(rng)};
    fits.push_back(fake_fit(b, {w, 0, 0, w}, sizes[k]));
  }
  auto est = aee_combine(fits);
  auto avg = weighted_average(fits);
  CHECK(max_abs_diff(est.estimate, avg) <= 1e-15);
}

TEST_CASE("one_step_distributed with one shard stays at the local MLE") {
  auto shards = sim_shards(FamilyKind::logistic, 512, 3, 1, 7);
  TransportSpec in_process;
  auto est = one_step_distributed(GlmFamily::logistic(), shards, FitOptions{}, in_process);
  CHECK(est.rounds_of_communication == 2);
  REQUIRE(est.local_convergence.size() == 1);
  CHECK(est.local_convergence[0]);
  auto local = fit_mle(GlmFamily::logistic(), shards[0].data, std::nullopt, FitOptions{});
  CHECK(max_abs_diff(est.estimate, local.estimate) <= 1e-6);
}

TEST_CASE("identical shards collapse to the common local MLE") {
  auto shards = sim_shards(FamilyKind::logistic, 256, 2, 1, 99);
  std::vector<Shard> replicated;
  for (int k = 0; k < 4; ++k) {
    Shard s = shards[0];
    s.worker_id = k;
    replicated.push_back(std::move(s));
  }
  TransportSpec in_process;
  auto est = one_step_distributed(GlmFamily::logistic(), replicated, FitOptions{}, in_process);
  auto local = fit_mle(GlmFamily::logistic(), shards[0].data, std::nullopt, FitOptions{});
  CHECK(max_abs_diff(est.estimate, local.estimate) <= 1e-6);

  auto csl = csl_one_step(GlmFamily::logistic(), replicated, FitOptions{}, in_process);
  CHECK(max_abs_diff(csl.estimate, est.estimate) <= 1e-12);
}

TEST_CASE("one_step_distributed equals the pooled one-step oracle") {
  auto shards = sim_shards(FamilyKind::probit, 2048, 4, 8, 4242);
  TransportSpec in_process;
  auto est = one_step_distributed(GlmFamily::probit(), shards, FitOptions{}, in_process);

  std::vector<FitResult> locals;
  for (const auto& s : shards)
    locals.push_back(fit_mle(GlmFamily::probit(), s.data, std::nullopt, FitOptions{}));
  BetaVector bar = weighted_average(locals);
  Dataset pooled = concat_shards(shards);
  BetaVector oracle_step = one_step_update(GlmFamily::probit(), pooled, bar);
  CHECK(max_abs_diff(est.estimate, oracle_step) <= 1e-10);
  REQUIRE(est.global_fisher.has_value());
  // aggregated Fisher equals the pooled Fisher at the average
  auto pooled_fisher = fisher_info(GlmFamily::probit(), pooled, bar);
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < pooled_fisher.entries().size(); ++i) {
    diff = std::max(diff, std::fabs(pooled_fisher.entries()[i] - est.global_fisher->entries()[i]));
    scale = std::max(scale, std::fabs(pooled_fisher.entries()[i]));
  }
  CHECK(diff <= 1e-10 * scale);
}

TEST_CASE("csl matches one_step for one shard and diverges under heterogeneity") {
  TransportSpec in_process;
  auto single = sim_shards(FamilyKind::logistic, 512, 3, 1, 1234);
  auto a = one_step_distributed(GlmFamily::logistic(), single, FitOptions{}, in_process);
  auto b = csl_one_step(GlmFamily::logistic(), single, FitOptions{}, in_process);
  CHECK(std::memcmp(a.estimate.data(), b.estimate.data(), sizeof(double) * a.estimate.size()) ==
        0);
  CHECK(b.rounds_of_communication == 2);
  CHECK_FALSE(b.global_fisher.has_value());

  // shard 0 drawn with rho = 0, the others with rho = 0.75: the scaled
  // local Fisher no longer matches the global one
  GlmFamily logistic = GlmFamily::logistic();
  auto flat = sim_shards(FamilyKind::logistic, 512, 3, 4, 77, 0.0);
  auto curved = sim_shards(FamilyKind::logistic, 512, 3, 4, 77, 0.75);
  std::vector<Shard> mixed;
  mixed.push_back(flat[0]);
  for (int k = 1; k < 4; ++k) mixed.push_back(curved[k]);
  auto one = one_step_distributed(logistic, mixed, FitOptions{}, in_process);
  auto csl = csl_one_step(logistic, mixed, FitOptions{}, in_process);
  CHECK(max_abs_diff(one.estimate, csl.estimate) > 1e-8);

  // the exact-Fisher variant agrees with the pooled oracle even here
  std::vector<FitResult> locals;
  for (const auto& s : mixed) locals.push_back(fit_mle(logistic, s.data, std::nullopt, {}));
  Dataset pooled = concat_shards(mixed);
  auto oracle_step = one_step_update(logistic, pooled, weighted_average(locals));
  CHECK(max_abs_diff(one.estimate, oracle_step) <= 1e-10);
}

TEST_CASE("global_fit equals the pooled fit and ignores shard order") {
  auto shards = sim_shards(FamilyKind::poisson, 300, 2, 3, 555);
  auto est = global_fit(GlmFamily::poisson(), shards, FitOptions{});
  CHECK(est.rounds_of_communication == 0);
  CHECK(est.global_fisher.has_value());
  CHECK(est.local_convergence.size() == 3);

  Dataset pooled = concat_shards(shards);
  auto direct = fit_mle(GlmFamily::poisson(), pooled, std::nullopt, FitOptions{});
  CHECK(max_abs_diff(est.estimate, direct.estimate) == 0.0);

  // rotate the shard data blocks: same multiset of rows, new order
  std::vector<Shard> rotated;
  for (int k = 0; k < 3; ++k) {
    Shard s = shards[(k + 1) % 3];
    s.worker_id = k;
    rotated.push_back(std::move(s));
  }
  auto est2 = global_fit(GlmFamily::poisson(), rotated, FitOptions{});
  CHECK(max_abs_diff(est2.estimate, est.estimate) <= 1e-8);
}

TEST_CASE("shard decomposition reproduces pooled score and fisher") {
  GlmFamily probit = GlmFamily::probit();
  auto shards = sim_shards(FamilyKind::probit, 1024, 4, 7, 9);
  Dataset pooled = concat_shards(shards);
  BetaVector beta{0.1, -0.2, 0.05, 0.2};

  std::vector<BetaVector> scores;
  std::vector<std::vector<double>> fishers;
  for (const auto& s : shards) {
    scores.push_back(score(probit, s.data, beta));
    fishers.push_back(fisher_info(probit, s.data, beta).entries());
  }
  std::vector<const double*> sp, fp;
  for (auto& s : scores) sp.push_back(s.data());
  for (auto& f : fishers) fp.push_back(f.data());
  auto sum_score = aggregate_buffers(sp, 4);
  auto sum_fisher = aggregate_buffers(fp, 16);

  auto pooled_score = score(probit, pooled, beta);
  auto pooled_fisher = fisher_info(probit, pooled, beta);
  for (int j = 0; j < 4; ++j)
    CHECK(std::fabs(sum_score[j] - pooled_score[j]) <=
          1e-10 * std::max(1.0, std::fabs(pooled_score[j])));
  for (int i = 0; i < 16; ++i)
    CHECK(std::fabs(sum_fisher[i] - pooled_fisher.entries()[i]) <=
          1e-10 * std::max(1.0, std::fabs(pooled_fisher.entries()[i])));
}

TEST_CASE("socket and in-process transports give bit-identical estimates") {
  auto shards = sim_shards(FamilyKind::logistic, 256, 2, 2, 31337);
  TransportSpec in_process;
  TransportSpec socket{TransportMode::socket, "127.0.0.1:0"};
  auto a = one_step_distributed(GlmFamily::logistic(), shards, FitOptions{}, in_process);
  auto b = one_step_distributed(GlmFamily::logistic(), shards, FitOptions{}, socket);
  CHECK(std::memcmp(a.estimate.data(), b.estimate.data(), sizeof(double) * a.estimate.size()) ==
        0);
}

TEST_CASE("rounds of communication per method") {
  CHECK(method_rounds(Method::average) == 1);
  CHECK(method_rounds(Method::aee) == 1);
  CHECK(method_rounds(Method::one_step) == 2);
  CHECK(method_rounds(Method::csl_one_step) == 2);
  CHECK(method_rounds(Method::global) == 0);

  auto shards = sim_shards(FamilyKind::logistic, 128, 2, 2, 5);
  TransportSpec in_process;
  for (Method m : {Method::average, Method::aee, Method::one_step, Method::csl_one_step,
                   Method::global}) {
    auto est = run_distributed(GlmFamily::logistic(), shards, FitOptions{}, m, in_process);
    CHECK(est.rounds_of_communication == method_rounds(m));
    CHECK(est.method == m);
  }
}

TEST_CASE("the weighted average is consistent: its error shrinks with n") {
  // Monte-Carlo shrinkage of ||beta_bar - beta0|| at fixed K as n grows.
  GlmFamily logistic = GlmFamily::logistic();
  BetaVector beta0 = true_beta(FamilyKind::logistic, 4);
  auto median_err = [&](std::int64_t n) {
    std::vector<double> errs;
    for (std::uint64_t t = 0; t < 5; ++t) {
      SimDesign design{FamilyKind::logistic, n, 4, 0.75, 808, 4};
      auto shards = gen_trial_shards(logistic, design, beta0, t);
      std::vector<FitResult> locals;
      for (const auto& s : shards)
        locals.push_back(fit_mle(logistic, s.data, std::nullopt, FitOptions{}));
      auto bar = weighted_average(locals);
      double err = 0.0;
      for (int j = 0; j < 4; ++j) err += (bar[j] - beta0[j]) * (bar[j] - beta0[j]);
      errs.push_back(std::sqrt(err));
    }
    std::sort(errs.begin(), errs.end());
    return errs[2];
  };
  double small = median_err(512);
  double large = median_err(32768);
  CHECK(large < 0.5 * small);
}

TEST_CASE("empty and inconsistent shard lists are rejected") {
  TransportSpec in_process;
  CHECK_THROWS_AS(one_step_distributed(GlmFamily::logistic(), {}, FitOptions{}, in_process),
                  ArgumentError);
  CHECK_THROWS_AS(weighted_average({}), ArgumentError);
  auto shards = sim_shards(FamilyKind::logistic, 64, 2, 2, 6);
  shards[1].worker_id = 5;
  CHECK_THROWS_AS(global_fit(GlmFamily::logistic(), shards, FitOptions{}), ArgumentError);
}
