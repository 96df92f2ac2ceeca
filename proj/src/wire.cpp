#include "glmdist/wire.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace glmd {

namespace {

constexpr std::uint8_t kMagic[4] = {'G', 'L', 'M', 'D'};

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_f64s(std::vector<std::uint8_t>& out, const std::vector<double>& v) {
  for (double x : v) put_f64(out, x);
}

struct Reader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;  // offset within the whole frame, for error reporting

  void need(std::size_t n, const char* what) const {
    if (pos + n > size)
      throw ProtocolError(std::string("truncated payload reading ") + what + " at offset " +
                              std::to_string(pos),
                          pos);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return data[pos++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(data[pos]) |
                      (static_cast<std::uint16_t>(data[pos + 1]) << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::vector<double> f64s(std::size_t count, const char* what) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = f64(what);
    return v;
  }
};

// Recover p from a payload of 8*(p^2 + p) + fixed bytes; exact or error.
std::size_t infer_p_quadratic(std::size_t payload_len, std::size_t fixed, const char* what) {
  if (payload_len < fixed + 16)
    throw ProtocolError(std::string(what) + ": payload too short", kHeaderSize);
  double body = static_cast<double>(payload_len - fixed) / 8.0;
  // p^2 + p = body
  auto p = static_cast<std::size_t>(std::floor((-1.0 + std::sqrt(1.0 + 4.0 * body)) / 2.0 + 0.5));
  if (p == 0 || 8 * (p * p + p) + fixed != payload_len)
    throw ProtocolError(std::string(what) + ": payload length " + std::to_string(payload_len) +
                            " does not match any p",
                        kHeaderSize);
  return p;
}

}  // namespace

MsgType message_type(const WireMessage& m) {
  struct Visitor {
    MsgType operator()(const HelloMsg&) const { return MsgType::hello; }
    MsgType operator()(const LocalFitMsg&) const { return MsgType::local_fit; }
    MsgType operator()(const BroadcastBetaMsg&) const { return MsgType::broadcast_beta; }
    MsgType operator()(const LocalScoreFisherMsg&) const { return MsgType::local_score_fisher; }
    MsgType operator()(const ResultMsg&) const { return MsgType::result; }
    MsgType operator()(const AbortMsg&) const { return MsgType::abort; }
  };
  return std::visit(Visitor{}, m);
}

std::vector<std::uint8_t> encode_message(const WireMessage& m) {
  std::vector<std::uint8_t> payload;
  if (const auto* h = std::get_if<HelloMsg>(&m)) {
    put_u32(payload, h->worker_id);
    put_u64(payload, h->n_k);
    put_u32(payload, h->p);
    put_u8(payload, h->family);
  } else if (const auto* f = std::get_if<LocalFitMsg>(&m)) {
    if (f->fisher.size() != f->beta.size() * f->beta.size())
      throw ArgumentError("LocalFitMsg: fisher must be p*p for beta of length p");
    put_u8(payload, f->converged);
    put_u32(payload, f->iterations);
    put_f64s(payload, f->beta);
    put_f64s(payload, f->fisher);
  } else if (const auto* b = std::get_if<BroadcastBetaMsg>(&m)) {
    put_f64s(payload, b->beta);
  } else if (const auto* s = std::get_if<LocalScoreFisherMsg>(&m)) {
    if (s->fisher.size() != s->score.size() * s->score.size())
      throw ArgumentError("LocalScoreFisherMsg: fisher must be p*p for score of length p");
    put_f64s(payload, s->score);
    put_f64s(payload, s->fisher);
  } else if (const auto* r = std::get_if<ResultMsg>(&m)) {
    put_u8(payload, r->method);
    put_f64s(payload, r->beta);
  } else if (const auto* a = std::get_if<AbortMsg>(&m)) {
    put_u16(payload, a->code);
    payload.insert(payload.end(), a->message.begin(), a->message.end());
  }

  std::vector<std::uint8_t> frame;
  frame.reserve(kHeaderSize + payload.size());
  frame.insert(frame.end(), kMagic, kMagic + 4);
  put_u8(frame, kWireVersion);
  put_u8(frame, static_cast<std::uint8_t>(message_type(m)));
  put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  frame.insert(frame.end(), payload.begin(), payload.end());
  return frame;
}

std::size_t parse_header(const std::uint8_t* h, MsgType* type_out) {
  if (std::memcmp(h, kMagic, 4) != 0) throw ProtocolError("bad magic", 0);
  if (h[4] != kWireVersion)
    throw ProtocolError("unsupported version " + std::to_string(h[4]), 4);
  std::uint8_t t = h[5];
  if (t < 0x01 || t > 0x06)
    throw ProtocolError("unknown message type " + std::to_string(t), 5);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(h[6 + i]) << (8 * i);
  if (len > (1u << 30)) throw ProtocolError("payload length implausibly large", 6);
  if (type_out) *type_out = static_cast<MsgType>(t);
  return len;
}

WireMessage decode_message(const std::vector<std::uint8_t>& frame) {
  if (frame.size() < kHeaderSize) throw ProtocolError("frame shorter than header", 0);
  MsgType type;
  std::size_t payload_len = parse_header(frame.data(), &type);
  if (frame.size() != kHeaderSize + payload_len)
    throw ProtocolError("frame length " + std::to_string(frame.size()) +
                            " does not match header payload_len " + std::to_string(payload_len),
                        6);
  Reader r{frame.data(), frame.size(), kHeaderSize};

  switch (type) {
    case MsgType::hello: {
      if (payload_len != 17) throw ProtocolError("HELLO payload must be 17 bytes", kHeaderSize);
      HelloMsg m;
      m.worker_id = r.u32("worker_id");
      m.n_k = r.u64("n_k");
      m.p = r.u32("p");
      m.family = r.u8("family");
      return m;
    }
    case MsgType::local_fit: {
      std::size_t p = infer_p_quadratic(payload_len, 5, "LOCAL_FIT");
      LocalFitMsg m;
      m.converged = r.u8("converged");
      m.iterations = r.u32("iterations");
      m.beta = r.f64s(p, "beta");
      m.fisher = r.f64s(p * p, "fisher");
      return m;
    }
    case MsgType::broadcast_beta: {
      if (payload_len == 0 || payload_len % 8 != 0)
        throw ProtocolError("BROADCAST_BETA payload must be a positive multiple of 8",
                            kHeaderSize);
      BroadcastBetaMsg m;
      m.beta = r.f64s(payload_len / 8, "beta");
      return m;
    }
    case MsgType::local_score_fisher: {
      std::size_t p = infer_p_quadratic(payload_len, 0, "LOCAL_SCORE_FISHER");
      LocalScoreFisherMsg m;
      m.score = r.f64s(p, "score");
      m.fisher = r.f64s(p * p, "fisher");
      return m;
    }
    case MsgType::result: {
      if (payload_len < 9 || (payload_len - 1) % 8 != 0)
        throw ProtocolError("RESULT payload must be 1 + 8p bytes", kHeaderSize);
      ResultMsg m;
      m.method = r.u8("method");
      m.beta = r.f64s((payload_len - 1) / 8, "beta");
      return m;
    }
    case MsgType::abort: {
      if (payload_len < 2) throw ProtocolError("ABORT payload must carry a u16 code", kHeaderSize);
      AbortMsg m;
      m.code = r.u16("code");
      m.message.assign(reinterpret_cast<const char*>(frame.data()) + r.pos,
                       frame.size() - r.pos);
      return m;
    }
  }
  throw ProtocolError("unreachable message type", 5);
}

}  // namespace glmd
