#pragma once

#include "glmdist/distributed.hpp"

namespace glmd {

struct ProtocolOptions {
  FitOptions fit;
  Millis handshake_timeout{30000};
  Millis round_timeout{300000};
};

// Drive the exchange for `expected_workers` workers: collect HELLOs, then
// LOCAL_FITs; for one_step/csl broadcast the weighted average and collect
// LOCAL_SCORE_FISHERs; send RESULT to every worker. Aggregation happens
// after a barrier on all K messages, in ascending worker_id order. On any
// failure an ABORT is broadcast before the error propagates.
DistributedEstimate coordinator_run(const GlmFamily& family, int expected_workers,
                                    const ProtocolOptions& opts, Method method,
                                    Listener& listener);

struct WorkerOutcome {
  Method method = Method::average;
  BetaVector final_estimate;  // from the RESULT message
};

// Single worker state machine over an established stream: HELLO, local fit,
// LOCAL_FIT, then either RESULT (one round) or BROADCAST_BETA ->
// LOCAL_SCORE_FISHER -> RESULT. Errors and ABORTs surface as exceptions.
WorkerOutcome worker_run(const GlmFamily& family, const Shard& shard, const ProtocolOptions& opts,
                         MessageStream& stream);

}  // namespace glmd
