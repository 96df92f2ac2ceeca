#include "glmdist/distributed.hpp"

#include <thread>

#include "glmdist/protocol.hpp"
#include "glmdist/summation.hpp"

namespace glmd {

const char* method_name(Method m) {
  switch (m) {
    case Method::average: return "average";
    case Method::aee: return "aee";
    case Method::one_step: return "one_step";
    case Method::csl_one_step: return "csl_one_step";
    case Method::global: return "global";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "average") return Method::average;
  if (name == "aee") return Method::aee;
  if (name == "one_step") return Method::one_step;
  if (name == "csl_one_step") return Method::csl_one_step;
  if (name == "global") return Method::global;
  throw ArgumentError("unknown method: " + name);
}

int method_rounds(Method m) {
  switch (m) {
    case Method::average:
    case Method::aee: return 1;
    case Method::one_step:
    case Method::csl_one_step: return 2;
    case Method::global: return 0;
  }
  return 0;
}

std::vector<double> aggregate_buffers(const std::vector<const double*>& parts, std::size_t width) {
  return pairwise_reduce(parts.size(), width,
                         [&](std::size_t lo, std::size_t hi, double* out) {
                           for (std::size_t k = lo; k < hi; ++k) {
                             const double* src = parts[k];
                             for (std::size_t i = 0; i < width; ++i) out[i] += src[i];
                           }
                         });
}

BetaVector combine_weighted_average(const std::vector<BetaVector>& betas,
                                    const std::vector<std::int64_t>& sizes) {
  if (betas.empty() || betas.size() != sizes.size())
    throw ArgumentError("weighted average requires matching non-empty inputs");
  const std::size_t p = betas.front().size();
  std::int64_t n = 0;
  for (std::int64_t s : sizes) n += s;
  std::vector<BetaVector> weighted(betas.size());
  for (std::size_t k = 0; k < betas.size(); ++k) {
    if (betas[k].size() != p) throw ArgumentError("weighted average: p mismatch across fits");
    double w = static_cast<double>(sizes[k]) / static_cast<double>(n);
    weighted[k].resize(p);
    for (std::size_t j = 0; j < p; ++j) weighted[k][j] = w * betas[k][j];
  }
  std::vector<const double*> parts(betas.size());
  for (std::size_t k = 0; k < betas.size(); ++k) parts[k] = weighted[k].data();
  return aggregate_buffers(parts, p);
}

BetaVector weighted_average(const std::vector<FitResult>& fits) {
  if (fits.empty()) throw ArgumentError("weighted_average: no fits");
  std::vector<BetaVector> betas(fits.size());
  std::vector<std::int64_t> sizes(fits.size());
  for (std::size_t k = 0; k < fits.size(); ++k) {
    betas[k] = fits[k].estimate;
    sizes[k] = fits[k].local_n;
  }
  return combine_weighted_average(betas, sizes);
}

DistributedEstimate aee_combine(const std::vector<FitResult>& fits) {
  if (fits.empty()) throw ArgumentError("aee_combine: no fits");
  const int p = static_cast<int>(fits.front().estimate.size());
  const std::size_t pp = static_cast<std::size_t>(p) * p;
  std::vector<const double*> fparts(fits.size());
  std::vector<BetaVector> rhs_parts(fits.size());
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (static_cast<int>(fits[k].estimate.size()) != p)
      throw ArgumentError("aee_combine: p mismatch across fits");
    if (fits[k].fisher_at_estimate.dim() != p)
      throw ArgumentError("aee_combine: fit lacks its local Fisher matrix");
    fparts[k] = fits[k].fisher_at_estimate.entries().data();
    rhs_parts[k] = fits[k].fisher_at_estimate.multiply(fits[k].estimate);
  }
  SpdMatrix agg(p, aggregate_buffers(fparts, pp));
  std::vector<const double*> rparts(fits.size());
  for (std::size_t k = 0; k < fits.size(); ++k) rparts[k] = rhs_parts[k].data();
  BetaVector rhs = aggregate_buffers(rparts, p);

  DistributedEstimate out;
  out.method = Method::aee;
  out.rounds_of_communication = method_rounds(Method::aee);
  out.local_convergence.reserve(fits.size());
  for (const auto& f : fits) out.local_convergence.push_back(f.converged);
  CholeskyFactor factor;
  try {
    factor = cholesky(agg);
  } catch (const NotPositiveDefiniteError& e) {
    throw SingularFisherError(std::string("aee_combine: aggregate fisher not positive definite: ") +
                              e.what());
  }
  out.estimate = spd_solve(factor, rhs);
  return out;
}

namespace {

void check_shards(const std::vector<Shard>& shards) {
  if (shards.empty()) throw ArgumentError("no shards");
  const int p = shards.front().data.p();
  for (std::size_t k = 0; k < shards.size(); ++k) {
    if (shards[k].worker_id != static_cast<int>(k))
      throw ArgumentError("shard worker_ids must be contiguous from 0");
    if (shards[k].data.p() != p) throw ArgumentError("shards disagree on p");
  }
}

// Run the exchange with the worker side on threads. Any worker exception is
// swallowed here: the coordinator observes the failure through the protocol
// (missing or ABORT message) and reports it with the worker named.
DistributedEstimate run_exchange(const GlmFamily& family, const std::vector<Shard>& shards,
                                 const ProtocolOptions& opts, Method method,
                                 const TransportSpec& transport) {
  const int K = static_cast<int>(shards.size());
  std::unique_ptr<Listener> tcp;
  InProcessHub hub;
  Listener* listener = nullptr;
  std::string endpoint;
  if (transport.mode == TransportMode::socket) {
    tcp = tcp_listen(transport.endpoint.empty() ? "127.0.0.1:0" : transport.endpoint);
    listener = tcp.get();
    endpoint = tcp->address();
  } else {
    listener = &hub.listener();
  }

  std::vector<std::thread> workers;
  workers.reserve(K);
  for (int k = 0; k < K; ++k) {
    workers.emplace_back([&, k] {
      try {
        std::unique_ptr<MessageStream> stream =
            transport.mode == TransportMode::socket
                ? tcp_dial(endpoint, opts.handshake_timeout)
                : hub.dial();
        worker_run(family, shards[k], opts, *stream);
      } catch (...) {
      }
    });
  }

  try {
    DistributedEstimate result = coordinator_run(family, K, opts, method, *listener);
    for (auto& t : workers) t.join();
    return result;
  } catch (...) {
    for (auto& t : workers) t.join();
    throw;
  }
}

DistributedEstimate run_two_round(const GlmFamily& family, const std::vector<Shard>& shards,
                                  const FitOptions& opts, Method method,
                                  const TransportSpec& transport) {
  check_shards(shards);
  ProtocolOptions popts;
  popts.fit = opts;
  return run_exchange(family, shards, popts, method, transport);
}

}  // namespace

DistributedEstimate one_step_distributed(const GlmFamily& family, const std::vector<Shard>& shards,
                                         const FitOptions& opts, const TransportSpec& transport) {
  return run_two_round(family, shards, opts, Method::one_step, transport);
}

DistributedEstimate csl_one_step(const GlmFamily& family, const std::vector<Shard>& shards,
                                 const FitOptions& opts, const TransportSpec& transport) {
  return run_two_round(family, shards, opts, Method::csl_one_step, transport);
}

DistributedEstimate global_fit(const GlmFamily& family, const std::vector<Shard>& shards,
                               const FitOptions& opts) {
  check_shards(shards);
  Dataset pooled = concat_shards(shards);
  FitResult fit = fit_mle(family, pooled, std::nullopt, opts);
  DistributedEstimate out;
  out.method = Method::global;
  out.estimate = fit.estimate;
  out.global_fisher = std::move(fit.fisher_at_estimate);
  out.rounds_of_communication = method_rounds(Method::global);
  out.local_convergence.assign(shards.size(), fit.converged);
  return out;
}

DistributedEstimate run_distributed(const GlmFamily& family, const std::vector<Shard>& shards,
                                    const FitOptions& opts, Method method,
                                    const TransportSpec& transport) {
  if (method == Method::global) return global_fit(family, shards, opts);
  check_shards(shards);
  ProtocolOptions popts;
  popts.fit = opts;
  return run_exchange(family, shards, popts, method, transport);
}

}  // namespace glmd
