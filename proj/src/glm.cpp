#include "glmdist/glm.hpp"

#include <cmath>
#include <string>

#include "glmdist/summation.hpp"

namespace glmd {

void Dataset::validate(FamilyKind kind) const {
  if (design.rows() < 1 || design.cols() < 1)
    throw ArgumentError("dataset must have n >= 1 and p >= 1");
  if (static_cast<std::int64_t>(response.size()) != design.rows())
    throw ArgumentError("response length does not match design rows");
  for (double x : design.data())
    if (!std::isfinite(x)) throw DomainError("design matrix contains a non-finite value");
  GlmFamily::make(kind).validate_response(response);
}

Dataset concat_shards(const std::vector<Shard>& shards) {
  if (shards.empty()) throw ArgumentError("no shards to concatenate");
  const int p = shards.front().data.p();
  std::int64_t n = 0;
  for (std::size_t k = 0; k < shards.size(); ++k) {
    if (shards[k].worker_id != static_cast<int>(k))
      throw ArgumentError("shard worker_ids must be contiguous from 0");
    if (shards[k].data.p() != p) throw ArgumentError("shards disagree on p");
    n += shards[k].data.n();
  }
  Dataset out;
  out.design = Matrix(n, p);
  out.response.reserve(n);
  std::int64_t row = 0;
  for (const Shard& s : shards) {
    for (std::int64_t i = 0; i < s.data.n(); ++i, ++row) {
      auto src = s.data.design.row(i);
      auto dst = out.design.row(row);
      for (int j = 0; j < p; ++j) dst[j] = src[j];
    }
    out.response.insert(out.response.end(), s.data.response.begin(), s.data.response.end());
  }
  return out;
}

namespace {

inline void check_dims(const Dataset& data, const BetaVector& beta) {
  if (static_cast<int>(beta.size()) != data.p())
    throw ArgumentError("beta length " + std::to_string(beta.size()) +
                        " does not match design p = " + std::to_string(data.p()));
}

inline double dot_row(std::span<const double> z, const BetaVector& beta) {
  double eta = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) eta += z[j] * beta[j];
  return eta;
}

}  // namespace

double log_likelihood(const GlmFamily& family, const Dataset& data, const BetaVector& beta) {
  check_dims(data, beta);
  const auto n = static_cast<std::size_t>(data.n());
  std::vector<double> acc = pairwise_reduce(n, 1, [&](std::size_t lo, std::size_t hi, double* out) {
    for (std::size_t i = lo; i < hi; ++i) {
      double eta = dot_row(data.design.row(i), beta);
      out[0] += family.loglik_term(data.response[i], eta);
    }
  });
  return acc[0];
}

BetaVector score(const GlmFamily& family, const Dataset& data, const BetaVector& beta) {
  check_dims(data, beta);
  const auto n = static_cast<std::size_t>(data.n());
  const int p = data.p();
  return pairwise_reduce(n, p, [&](std::size_t lo, std::size_t hi, double* out) {
    for (std::size_t i = lo; i < hi; ++i) {
      auto z = data.design.row(i);
      double eta = dot_row(z, beta);
      auto ev = family.row_eval(eta);
      double c = ev.u_prime * (data.response[i] - ev.mean);
      for (int j = 0; j < p; ++j) out[j] += z[j] * c;
    }
  });
}

namespace {

// Scatter a packed upper triangle (row-major, diagonal included) into a full
// symmetric matrix.
SpdMatrix unpack_upper(int p, const std::vector<double>& packed) {
  std::vector<double> full(static_cast<std::size_t>(p) * p, 0.0);
  std::size_t idx = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j, ++idx) {
      full[static_cast<std::size_t>(i) * p + j] = packed[idx];
      full[static_cast<std::size_t>(j) * p + i] = packed[idx];
    }
  return SpdMatrix(p, std::move(full));
}

}  // namespace

SpdMatrix fisher_info(const GlmFamily& family, const Dataset& data, const BetaVector& beta) {
  check_dims(data, beta);
  const auto n = static_cast<std::size_t>(data.n());
  const int p = data.p();
  const std::size_t tri = static_cast<std::size_t>(p) * (p + 1) / 2;
  std::vector<double> packed =
      pairwise_reduce(n, tri, [&](std::size_t lo, std::size_t hi, double* out) {
        for (std::size_t i = lo; i < hi; ++i) {
          auto z = data.design.row(i);
          double eta = dot_row(z, beta);
          double wi = family.w(eta);
          std::size_t idx = 0;
          for (int a = 0; a < p; ++a) {
            double za = wi * z[a];
            for (int b = a; b < p; ++b, ++idx) out[idx] += za * z[b];
          }
        }
      });
  return unpack_upper(p, packed);
}

Matrix observed_hessian(const GlmFamily& family, const Dataset& data, const BetaVector& beta) {
  check_dims(data, beta);
  const int p = data.p();
  SpdMatrix fisher = fisher_info(family, data, beta);
  Matrix h(p, p);
  if (family.canonical()) {
    // u'' vanishes identically, so R_n is the zero matrix.
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) h(i, j) = -fisher(i, j);
    return h;
  }
  const auto n = static_cast<std::size_t>(data.n());
  const std::size_t tri = static_cast<std::size_t>(p) * (p + 1) / 2;
  std::vector<double> packed =
      pairwise_reduce(n, tri, [&](std::size_t lo, std::size_t hi, double* out) {
        for (std::size_t i = lo; i < hi; ++i) {
          auto z = data.design.row(i);
          double eta = dot_row(z, beta);
          double c = family.u_double_prime(eta) * (data.response[i] - family.h(eta));
          std::size_t idx = 0;
          for (int a = 0; a < p; ++a) {
            double za = c * z[a];
            for (int b = a; b < p; ++b, ++idx) out[idx] += za * z[b];
          }
        }
      });
  std::size_t idx = 0;
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j, ++idx) {
      h(i, j) = packed[idx] - fisher(i, j);
      h(j, i) = h(i, j);
    }
  return h;
}

ScoreFisher score_and_fisher(const GlmFamily& family, const Dataset& data, const BetaVector& beta) {
  check_dims(data, beta);
  const auto n = static_cast<std::size_t>(data.n());
  const int p = data.p();
  const std::size_t tri = static_cast<std::size_t>(p) * (p + 1) / 2;
  std::vector<double> acc =
      pairwise_reduce(n, p + tri, [&](std::size_t lo, std::size_t hi, double* out) {
        double* s = out;
        double* f = out + p;
        for (std::size_t i = lo; i < hi; ++i) {
          auto z = data.design.row(i);
          double eta = dot_row(z, beta);
          auto ev = family.row_eval(eta);
          double c = ev.u_prime * (data.response[i] - ev.mean);
          for (int j = 0; j < p; ++j) s[j] += z[j] * c;
          std::size_t idx = 0;
          for (int a = 0; a < p; ++a) {
            double za = ev.weight * z[a];
            for (int b = a; b < p; ++b, ++idx) f[idx] += za * z[b];
          }
        }
      });
  ScoreFisher out;
  out.score.assign(acc.begin(), acc.begin() + p);
  out.fisher = unpack_upper(p, std::vector<double>(acc.begin() + p, acc.end()));
  return out;
}

}  // namespace glmd
