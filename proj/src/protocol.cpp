#include "glmdist/protocol.hpp"

#include <cmath>

#include "glmdist/summation.hpp"

namespace glmd {

namespace {

void abort_all(std::vector<std::unique_ptr<MessageStream>>& conns, std::uint16_t code,
               const std::string& msg) {
  for (auto& c : conns) {
    if (!c) continue;
    try {
      c->send(AbortMsg{code, msg});
    } catch (...) {
      // Peer already gone; nothing more to do for it.
    }
  }
}

}  // namespace

DistributedEstimate coordinator_run(const GlmFamily& family, int expected_workers,
                                    const ProtocolOptions& opts, Method method,
                                    Listener& listener) {
  if (expected_workers < 1) throw ArgumentError("coordinator requires at least one worker");
  if (method == Method::global)
    throw ArgumentError("the global method runs on pooled data, not over the protocol");
  const int K = expected_workers;

  std::vector<std::unique_ptr<MessageStream>> conns(K);
  std::vector<std::uint64_t> sizes(K, 0);
  int p = -1;

  auto deadline = std::chrono::steady_clock::now() + opts.handshake_timeout;
  auto remaining = [&] {
    auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
    return left.count() > 0 ? left : Millis(0);
  };

  int connected = 0;
  try {
    while (connected < K) {
      if (remaining().count() == 0)
        throw TransportError("handshake timed out with " + std::to_string(connected) + " of " +
                             std::to_string(K) + " workers");
      auto conn = listener.accept(remaining());
      WireMessage msg = conn->recv(remaining());
      const auto* hello = std::get_if<HelloMsg>(&msg);
      if (!hello) throw ProtocolError("expected HELLO as first message");
      if (hello->family != static_cast<std::uint8_t>(family.kind()))
        throw ProtocolError("worker family does not match coordinator");
      if (hello->worker_id >= static_cast<std::uint32_t>(K))
        throw ProtocolError("worker_id " + std::to_string(hello->worker_id) + " out of range");
      if (conns[hello->worker_id])
        throw ProtocolError("duplicate worker_id " + std::to_string(hello->worker_id));
      if (p < 0)
        p = static_cast<int>(hello->p);
      else if (static_cast<int>(hello->p) != p)
        throw ProtocolError("worker p mismatch: " + std::to_string(hello->p) + " vs " +
                            std::to_string(p));
      sizes[hello->worker_id] = hello->n_k;
      conns[hello->worker_id] = std::move(conn);
      ++connected;
    }
  } catch (...) {
    abort_all(conns, kAbortProtocol, "handshake failed");
    throw;
  }

  std::int64_t n = 0;
  for (auto s : sizes) n += static_cast<std::int64_t>(s);

  // Round 1: local fits.
  std::vector<BetaVector> betas(K);
  std::vector<std::vector<double>> fishers(K);
  std::vector<bool> conv(K, false);
  for (int k = 0; k < K; ++k) {
    try {
      WireMessage msg = conns[k]->recv(opts.round_timeout);
      if (const auto* abort = std::get_if<AbortMsg>(&msg))
        throw TransportError("worker " + std::to_string(k) + " aborted: " + abort->message, k);
      const auto* fit = std::get_if<LocalFitMsg>(&msg);
      if (!fit) throw ProtocolError("expected LOCAL_FIT from worker " + std::to_string(k));
      if (static_cast<int>(fit->beta.size()) != p)
        throw ProtocolError("LOCAL_FIT p mismatch from worker " + std::to_string(k));
      betas[k] = fit->beta;
      fishers[k] = fit->fisher;
      conv[k] = fit->converged != 0;
    } catch (const TransportError& e) {
      abort_all(conns, kAbortTransport, e.what());
      throw TransportError("round 1 failed at worker " + std::to_string(k) + ": " + e.what(), k);
    } catch (...) {
      abort_all(conns, kAbortProtocol, "round 1 failed");
      throw;
    }
  }

  std::vector<std::int64_t> isizes(sizes.begin(), sizes.end());
  BetaVector beta_bar = combine_weighted_average(betas, isizes);

  DistributedEstimate result;
  result.method = method;
  result.local_convergence = conv;
  result.rounds_of_communication = method_rounds(method);

  try {
    if (method == Method::average) {
      result.estimate = beta_bar;
    } else if (method == Method::aee) {
      std::vector<const double*> fparts(K);
      std::vector<BetaVector> rhs_parts(K);
      for (int k = 0; k < K; ++k) {
        fparts[k] = fishers[k].data();
        rhs_parts[k].assign(p, 0.0);
        for (int i = 0; i < p; ++i) {
          double s = 0.0;
          for (int j = 0; j < p; ++j) s += fishers[k][static_cast<std::size_t>(i) * p + j] * betas[k][j];
          rhs_parts[k][i] = s;
        }
      }
      SpdMatrix agg(p, aggregate_buffers(fparts, static_cast<std::size_t>(p) * p));
      std::vector<const double*> rparts(K);
      for (int k = 0; k < K; ++k) rparts[k] = rhs_parts[k].data();
      BetaVector rhs = aggregate_buffers(rparts, p);
      CholeskyFactor f;
      try {
        f = cholesky(agg);
      } catch (const NotPositiveDefiniteError& e) {
        throw SingularFisherError(std::string("aggregate fisher not positive definite: ") +
                                  e.what());
      }
      result.estimate = spd_solve(f, rhs);
    } else {
      // Round 2: broadcast the average, collect score/Fisher at it.
      for (int k = 0; k < K; ++k) conns[k]->send(BroadcastBetaMsg{beta_bar});
      std::vector<std::vector<double>> scores(K), fishers2(K);
      for (int k = 0; k < K; ++k) {
        WireMessage msg = conns[k]->recv(opts.round_timeout);
        if (const auto* abort = std::get_if<AbortMsg>(&msg))
          throw TransportError("worker " + std::to_string(k) + " aborted: " + abort->message, k);
        const auto* sf = std::get_if<LocalScoreFisherMsg>(&msg);
        if (!sf) throw ProtocolError("expected LOCAL_SCORE_FISHER from worker " + std::to_string(k));
        if (static_cast<int>(sf->score.size()) != p)
          throw ProtocolError("LOCAL_SCORE_FISHER p mismatch from worker " + std::to_string(k));
        scores[k] = sf->score;
        fishers2[k] = sf->fisher;
      }
      std::vector<const double*> sparts(K);
      for (int k = 0; k < K; ++k) sparts[k] = scores[k].data();
      BetaVector global_score = aggregate_buffers(sparts, p);

      if (method == Method::one_step) {
        std::vector<const double*> fparts(K);
        for (int k = 0; k < K; ++k) fparts[k] = fishers2[k].data();
        SpdMatrix global_fisher(p, aggregate_buffers(fparts, static_cast<std::size_t>(p) * p));
        CholeskyFactor f;
        try {
          f = cholesky(global_fisher);
        } catch (const NotPositiveDefiniteError& e) {
          throw SingularFisherError(std::string("aggregate fisher not positive definite: ") +
                                    e.what());
        }
        BetaVector delta = spd_solve(f, global_score);
        result.estimate = beta_bar;
        for (int j = 0; j < p; ++j) result.estimate[j] += delta[j];
        result.global_fisher = std::move(global_fisher);
      } else {
        // csl_one_step: the global Fisher matrix is approximated by the
        // scaled local one, F_n ~ (n/n_1) F_{n_1}, so the update becomes
        // beta_bar + (n_1/n) F_{n_1}^{-1} S_n.
        SpdMatrix local_fisher(p, fishers2[0]);
        CholeskyFactor f;
        try {
          f = cholesky(local_fisher);
        } catch (const NotPositiveDefiniteError& e) {
          throw SingularFisherError(std::string("local fisher not positive definite: ") +
                                    e.what());
        }
        BetaVector delta = spd_solve(f, global_score);
        double scale = static_cast<double>(sizes[0]) / static_cast<double>(n);
        result.estimate = beta_bar;
        for (int j = 0; j < p; ++j) result.estimate[j] += scale * delta[j];
      }
    }
  } catch (const SingularFisherError& e) {
    abort_all(conns, kAbortNumerical, e.what());
    throw;
  } catch (const TransportError& e) {
    abort_all(conns, kAbortTransport, e.what());
    throw;
  } catch (...) {
    abort_all(conns, kAbortProtocol, "aggregation failed");
    throw;
  }

  ResultMsg out{static_cast<std::uint8_t>(method), result.estimate};
  for (int k = 0; k < K; ++k) {
    try {
      conns[k]->send(out);
    } catch (const TransportError& e) {
      throw TransportError("failed to deliver RESULT to worker " + std::to_string(k) + ": " +
                           e.what(), k);
    }
  }
  return result;
}

WorkerOutcome worker_run(const GlmFamily& family, const Shard& shard, const ProtocolOptions& opts,
                         MessageStream& stream) {
  const int p = shard.data.p();
  stream.send(HelloMsg{static_cast<std::uint32_t>(shard.worker_id),
                       static_cast<std::uint64_t>(shard.data.n()),
                       static_cast<std::uint32_t>(p),
                       static_cast<std::uint8_t>(family.kind())});

  FitResult fit;
  try {
    fit = fit_mle(family, shard.data, std::nullopt, opts.fit);
  } catch (const Error& e) {
    try {
      stream.send(AbortMsg{kAbortNumerical, e.what()});
    } catch (...) {
    }
    throw;
  }
  stream.send(LocalFitMsg{static_cast<std::uint8_t>(fit.converged ? 1 : 0),
                          static_cast<std::uint32_t>(fit.iterations), fit.estimate,
                          fit.fisher_at_estimate.entries()});

  WireMessage msg = stream.recv(opts.round_timeout);
  if (const auto* abort = std::get_if<AbortMsg>(&msg))
    throw TransportError("coordinator aborted: " + abort->message);
  if (const auto* result = std::get_if<ResultMsg>(&msg))
    return {static_cast<Method>(result->method), result->beta};

  const auto* bcast = std::get_if<BroadcastBetaMsg>(&msg);
  if (!bcast) throw ProtocolError("expected BROADCAST_BETA, RESULT or ABORT after LOCAL_FIT");
  if (static_cast<int>(bcast->beta.size()) != p)
    throw ProtocolError("BROADCAST_BETA p mismatch: got " + std::to_string(bcast->beta.size()) +
                        ", shard has p = " + std::to_string(p));

  ScoreFisher sf = score_and_fisher(family, shard.data, bcast->beta);
  stream.send(LocalScoreFisherMsg{sf.score, sf.fisher.entries()});

  msg = stream.recv(opts.round_timeout);
  if (const auto* abort = std::get_if<AbortMsg>(&msg))
    throw TransportError("coordinator aborted: " + abort->message);
  const auto* result = std::get_if<ResultMsg>(&msg);
  if (!result) throw ProtocolError("expected RESULT after LOCAL_SCORE_FISHER");
  return {static_cast<Method>(result->method), result->beta};
}

}  // namespace glmd
