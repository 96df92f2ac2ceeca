#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "glmdist/errors.hpp"

namespace glmd {

// Frame layout: magic "GLMD", version u8 = 1, msg_type u8, payload_len u32
// little-endian, payload. All reals are IEEE-754 binary64 little-endian;
// matrices row-major.
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderSize = 10;

enum class MsgType : std::uint8_t {
  hello = 0x01,
  local_fit = 0x02,
  broadcast_beta = 0x03,
  local_score_fisher = 0x04,
  result = 0x05,
  abort = 0x06,
};

// Abort reason codes carried in AbortMsg.
inline constexpr std::uint16_t kAbortProtocol = 1;
inline constexpr std::uint16_t kAbortNumerical = 2;
inline constexpr std::uint16_t kAbortTimeout = 3;
inline constexpr std::uint16_t kAbortTransport = 4;

struct HelloMsg {
  std::uint32_t worker_id = 0;
  std::uint64_t n_k = 0;
  std::uint32_t p = 0;
  std::uint8_t family = 0;
  bool operator==(const HelloMsg&) const = default;
};

struct LocalFitMsg {
  std::uint8_t converged = 0;
  std::uint32_t iterations = 0;
  std::vector<double> beta;    // length p
  std::vector<double> fisher;  // length p*p
  bool operator==(const LocalFitMsg&) const = default;
};

struct BroadcastBetaMsg {
  std::vector<double> beta;
  bool operator==(const BroadcastBetaMsg&) const = default;
};

struct LocalScoreFisherMsg {
  std::vector<double> score;   // length p
  std::vector<double> fisher;  // length p*p
  bool operator==(const LocalScoreFisherMsg&) const = default;
};

struct ResultMsg {
  std::uint8_t method = 0;
  std::vector<double> beta;
  bool operator==(const ResultMsg&) const = default;
};

struct AbortMsg {
  std::uint16_t code = 0;
  std::string message;
  bool operator==(const AbortMsg&) const = default;
};

using WireMessage =
    std::variant<HelloMsg, LocalFitMsg, BroadcastBetaMsg, LocalScoreFisherMsg, ResultMsg, AbortMsg>;

MsgType message_type(const WireMessage& m);

// Full frame (header + payload).
std::vector<std::uint8_t> encode_message(const WireMessage& m);

// Decode a full frame. Array lengths are recovered from the payload size
// and validated exactly; any mismatch raises ProtocolError with the byte
// offset of the offending field.
WireMessage decode_message(const std::vector<std::uint8_t>& frame);

// Header scan used by the transports: validates magic/version/type and
// returns the payload length.
std::size_t parse_header(const std::uint8_t* header, MsgType* type_out);

}  // namespace glmd
