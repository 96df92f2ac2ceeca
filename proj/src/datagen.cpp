#include "glmdist/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "glmdist/linalg.hpp"

namespace glmd {

// Wichura's algorithm AS 241 (PPND16): rational approximations on three
// regions of q = p - 0.5 / r = sqrt(-log(min(p, 1-p))).
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inverse_normal_cdf: p must be in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -x : x;
}

double SplitMix64::next_normal() { return inverse_normal_cdf(next_uniform()); }

Matrix gen_design(const SimDesign& design) {
  design.validate();
  SplitMix64 rng(design.seed);
  Matrix z(design.n, design.p);
  const double carry = design.rho;
  const double fresh = std::sqrt(1.0 - design.rho * design.rho);
  for (std::int64_t i = 0; i < design.n; ++i) {
    auto row = z.row(i);
    double prev = rng.next_normal();
    row[0] = prev;
    for (int j = 1; j < design.p; ++j) {
      prev = carry * prev + fresh * rng.next_normal();
      row[j] = prev;
    }
  }
  return z;
}

BetaVector true_beta(FamilyKind model, int p) {
  if (p < 1) throw ArgumentError("true_beta: p must be >= 1");
  BetaVector beta(p);
  const double mag = model == FamilyKind::poisson ? 0.5 : 0.25;
  const double first = model == FamilyKind::poisson ? mag : -mag;
  for (int j = 0; j < p; ++j) beta[j] = (j % 2 == 0) ? first : -first;
  return beta;
}

namespace {

std::int64_t poisson_inversion(double lambda, SplitMix64& rng) {
  double u = rng.next_uniform();
  double pk = std::exp(-lambda);
  double cdf = pk;
  std::int64_t k = 0;
  while (u > cdf) {
    ++k;
    pk *= lambda / static_cast<double>(k);
    cdf += pk;
    if (pk < 1e-320 && u > cdf) return k;  // exhausted the tail mass
  }
  return k;
}

// Hormann (1993) transformed rejection with squeeze, valid for lambda >= 10.
std::int64_t poisson_ptrs(double lambda, SplitMix64& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = rng.next_uniform() - 0.5;
    double v = rng.next_uniform();
    double us = 0.5 - std::fabs(u);
    double kr = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kr);
    if (kr < 0.0 || (us < 0.013 && v > us)) continue;
    double k = kr;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * loglam - lambda - std::lgamma(k + 1.0))
      return static_cast<std::int64_t>(kr);
  }
}

}  // namespace

std::vector<double> gen_response(const GlmFamily& family, const Matrix& design,
                                 const BetaVector& beta0, std::uint64_t seed) {
  if (static_cast<int>(beta0.size()) != design.cols())
    throw ArgumentError("gen_response: beta0 length does not match design p");
  SplitMix64 rng(seed);
  std::vector<double> y(design.rows());
  for (std::int64_t i = 0; i < design.rows(); ++i) {
    auto z = design.row(i);
    double eta = 0.0;
    for (int j = 0; j < design.cols(); ++j) eta += z[j] * beta0[j];
    if (family.is_bernoulli()) {
      y[i] = rng.next_uniform() < family.h(eta) ? 1.0 : 0.0;
    } else {
      double lambda = family.h(eta);
      y[i] = static_cast<double>(lambda < 30.0 ? poisson_inversion(lambda, rng)
                                               : poisson_ptrs(lambda, rng));
    }
  }
  return y;
}

std::vector<std::int64_t> shard_sizes(std::int64_t n, int k) {
  if (k < 1) throw ArgumentError("shard count must be >= 1");
  if (k > n) throw ArgumentError("shard count exceeds number of rows");
  std::vector<std::int64_t> sizes(k, n / k);
  for (std::int64_t r = 0; r < n % k; ++r) ++sizes[static_cast<std::size_t>(r)];
  return sizes;
}

std::vector<Shard> partition_shards(const Dataset& data, int k) {
  auto sizes = shard_sizes(data.n(), k);
  std::vector<Shard> shards;
  shards.reserve(k);
  std::int64_t row = 0;
  const int p = data.p();
  for (int w = 0; w < k; ++w) {
    Shard s;
    s.worker_id = w;
    s.data.design = Matrix(sizes[w], p);
    s.data.response.assign(data.response.begin() + row, data.response.begin() + row + sizes[w]);
    for (std::int64_t i = 0; i < sizes[w]; ++i) {
      auto src = data.design.row(row + i);
      auto dst = s.data.design.row(i);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    row += sizes[w];
    shards.push_back(std::move(s));
  }
  return shards;
}

DesignDiagnostics design_diagnostics(const Matrix& design) {
  const std::int64_t n = design.rows();
  const int p = design.cols();
  if (n < p) throw ArgumentError("design_diagnostics requires n >= p");

  std::vector<double> gram(static_cast<std::size_t>(p) * p, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    auto z = design.row(i);
    for (int a = 0; a < p; ++a)
      for (int b = a; b < p; ++b) gram[static_cast<std::size_t>(a) * p + b] += z[a] * z[b];
  }
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      gram[static_cast<std::size_t>(b) * p + a] = gram[static_cast<std::size_t>(a) * p + b];
  for (double& x : gram) x /= static_cast<double>(n);

  DesignDiagnostics d;
  auto [lmin, lmax] = eigen_extremes(SpdMatrix(p, std::move(gram)), 1e-10);
  d.lambda_min_over_n = lmin;
  d.lambda_max_over_n = lmax;

  for (std::int64_t i = 0; i < n; ++i) {
    auto z = design.row(i);
    double s = 0.0;
    for (int j = 0; j < p; ++j) s += z[j] * z[j];
    d.max_row_norm_sq = std::max(d.max_row_norm_sq, s);
  }

  // Sampled directions: coordinate axes plus 64 seeded random unit vectors.
  auto quartic_in = [&](const std::vector<double>& dir) {
    double s = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      auto z = design.row(i);
      double t = 0.0;
      for (int j = 0; j < p; ++j) t += dir[j] * z[j];
      double t2 = t * t;
      s += t2 * t2;
    }
    return s / static_cast<double>(n);
  };
  std::vector<double> dir(p, 0.0);
  for (int j = 0; j < p; ++j) {
    dir.assign(p, 0.0);
    dir[j] = 1.0;
    d.quartic_proxy = std::max(d.quartic_proxy, quartic_in(dir));
  }
  SplitMix64 rng(0x51CADE5ULL);  // fixed diagnostic seed
  for (int rep = 0; rep < 64; ++rep) {
    double norm = 0.0;
    for (int j = 0; j < p; ++j) {
      dir[j] = rng.next_normal();
      norm += dir[j] * dir[j];
    }
    norm = std::sqrt(norm);
    for (int j = 0; j < p; ++j) dir[j] /= norm;
    d.quartic_proxy = std::max(d.quartic_proxy, quartic_in(dir));
  }
  return d;
}

std::vector<Shard> gen_trial_shards(const GlmFamily& family, const SimDesign& design,
                                    const BetaVector& beta0, std::uint64_t trial) {
  design.validate();
  auto sizes = shard_sizes(design.n, design.k);
  std::vector<Shard> shards;
  shards.reserve(design.k);
  for (int k = 0; k < design.k; ++k) {
    SimDesign local = design;
    local.n = sizes[k];
    local.k = 1;
    local.seed = shard_design_seed(design.seed, trial, static_cast<std::uint64_t>(k));
    Shard s;
    s.worker_id = k;
    s.data.design = gen_design(local);
    s.data.response =
        gen_response(family, s.data.design, beta0,
                     shard_response_seed(design.seed, trial, static_cast<std::uint64_t>(k)));
    shards.push_back(std::move(s));
  }
  return shards;
}

}  // namespace glmd
