#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "glmdist/wire.hpp"

namespace glmd {

enum class TransportMode : int { in_process = 0, socket = 1 };

struct TransportSpec {
  TransportMode mode = TransportMode::in_process;
  std::string endpoint;  // "host:port", socket mode only
};

using Millis = std::chrono::milliseconds;

// Reliable ordered duplex channel carrying whole frames. Both transports
// move the same encoded bytes, so results cannot depend on the mode.
class MessageStream {
 public:
  virtual ~MessageStream() = default;
  virtual void send(const WireMessage& m) = 0;
  // Blocks up to `timeout`; TransportError on timeout or peer loss.
  virtual WireMessage recv(Millis timeout) = 0;
  virtual void close() = 0;
};

class Listener {
 public:
  virtual ~Listener() = default;
  virtual std::unique_ptr<MessageStream> accept(Millis timeout) = 0;
  virtual std::string address() const = 0;
};

// In-process hub: dial() hands the client end to a worker and queues the
// server end for accept().
class InProcessHub {
 public:
  InProcessHub();
  ~InProcessHub();
  std::unique_ptr<MessageStream> dial();
  Listener& listener();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// TCP over "host:port" (IPv4). Binding to port 0 picks an ephemeral port,
// reported by Listener::address().
std::unique_ptr<Listener> tcp_listen(const std::string& endpoint);
std::unique_ptr<MessageStream> tcp_dial(const std::string& endpoint, Millis timeout);

// Counts payload-bearing frames by type in each direction; used by tests to
// assert the communication-round accounting.
class CountingStream : public MessageStream {
 public:
  explicit CountingStream(std::unique_ptr<MessageStream> inner) : inner_(std::move(inner)) {}
  void send(const WireMessage& m) override {
    ++sent_[static_cast<int>(message_type(m))];
    inner_->send(m);
  }
  WireMessage recv(Millis timeout) override {
    WireMessage m = inner_->recv(timeout);
    ++received_[static_cast<int>(message_type(m))];
    return m;
  }
  void close() override { inner_->close(); }
  int sent(MsgType t) const { return sent_[static_cast<int>(t)]; }
  int received(MsgType t) const { return received_[static_cast<int>(t)]; }

 private:
  std::unique_ptr<MessageStream> inner_;
  int sent_[8] = {0};
  int received_[8] = {0};
};

}  // namespace glmd
