#include "glmdist/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>

namespace glmd {

namespace {

// One direction of an in-process connection: a queue of encoded frames.
struct FrameQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<std::uint8_t>> frames;
  bool closed = false;

  void push(std::vector<std::uint8_t> frame) {
    {
      std::lock_guard lock(mu);
      if (closed) throw TransportError("in-process peer closed");
      frames.push_back(std::move(frame));
    }
    cv.notify_one();
  }

  std::vector<std::uint8_t> pop(Millis timeout) {
    std::unique_lock lock(mu);
    if (!cv.wait_for(lock, timeout, [&] { return !frames.empty() || closed; }))
      throw TransportError("in-process recv timed out");
    if (frames.empty()) throw TransportError("in-process peer closed");
    auto f = std::move(frames.front());
    frames.pop_front();
    return f;
  }

  void close() {
    {
      std::lock_guard lock(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class InProcessStream : public MessageStream {
 public:
  InProcessStream(std::shared_ptr<FrameQueue> out, std::shared_ptr<FrameQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}
  ~InProcessStream() override { close(); }

  void send(const WireMessage& m) override { out_->push(encode_message(m)); }
  WireMessage recv(Millis timeout) override { return decode_message(in_->pop(timeout)); }
  void close() override {
    out_->close();
    in_->close();
  }

 private:
  std::shared_ptr<FrameQueue> out_;
  std::shared_ptr<FrameQueue> in_;
};

}  // namespace

struct InProcessHub::Impl : Listener {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::unique_ptr<MessageStream>> pending;

  std::unique_ptr<MessageStream> accept(Millis timeout) override {
    std::unique_lock lock(mu);
    if (!cv.wait_for(lock, timeout, [&] { return !pending.empty(); }))
      throw TransportError("in-process accept timed out");
    auto s = std::move(pending.front());
    pending.pop_front();
    return s;
  }

  std::string address() const override { return "in-process"; }
};

InProcessHub::InProcessHub() : impl_(std::make_unique<Impl>()) {}
InProcessHub::~InProcessHub() = default;

std::unique_ptr<MessageStream> InProcessHub::dial() {
  auto a = std::make_shared<FrameQueue>();
  auto b = std::make_shared<FrameQueue>();
  auto client = std::make_unique<InProcessStream>(a, b);
  auto server = std::make_unique<InProcessStream>(b, a);
  {
    std::lock_guard lock(impl_->mu);
    impl_->pending.push_back(std::move(server));
  }
  impl_->cv.notify_one();
  return client;
}

Listener& InProcessHub::listener() { return *impl_; }

namespace {

struct SockAddr {
  sockaddr_in addr{};
};

SockAddr parse_endpoint(const std::string& endpoint) {
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos)
    throw TransportError("endpoint must be host:port, got '" + endpoint + "'");
  std::string host = endpoint.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(endpoint.substr(colon + 1));
  } catch (...) {
    throw TransportError("invalid port in endpoint '" + endpoint + "'");
  }
  if (port < 0 || port > 65535) throw TransportError("port out of range in '" + endpoint + "'");
  SockAddr sa;
  sa.addr.sin_family = AF_INET;
  sa.addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (host.empty() || host == "localhost") host = "127.0.0.1";
  if (inet_pton(AF_INET, host.c_str(), &sa.addr.sin_addr) != 1)
    throw TransportError("cannot parse IPv4 address '" + host + "'");
  return sa;
}

class Fd {
 public:
  Fd() : fd_(-1) {}
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  Fd& operator=(Fd&& o) noexcept {
    reset();
    fd_ = o.fd_;
    o.fd_ = -1;
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

void wait_readable(int fd, Millis timeout) {
  pollfd pfd{fd, POLLIN, 0};
  int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
  if (rc == 0) throw TransportError("socket recv timed out");
  if (rc < 0) throw TransportError(std::string("poll failed: ") + std::strerror(errno));
}

class TcpStream : public MessageStream {
 public:
  explicit TcpStream(Fd fd) : fd_(std::move(fd)) {
    int one = 1;
    ::setsockopt(fd_.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }

  void send(const WireMessage& m) override {
    auto frame = encode_message(m);
    std::size_t off = 0;
    while (off < frame.size()) {
      ssize_t n = ::send(fd_.get(), frame.data() + off, frame.size() - off, MSG_NOSIGNAL);
      if (n <= 0) throw TransportError(std::string("socket send failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  WireMessage recv(Millis timeout) override {
    auto deadline = std::chrono::steady_clock::now() + timeout;
    std::vector<std::uint8_t> frame(kHeaderSize);
    read_exact(frame.data(), kHeaderSize, deadline);
    std::size_t payload_len = parse_header(frame.data(), nullptr);
    frame.resize(kHeaderSize + payload_len);
    read_exact(frame.data() + kHeaderSize, payload_len, deadline);
    return decode_message(frame);
  }

  void close() override { fd_.reset(); }

 private:
  void read_exact(std::uint8_t* dst, std::size_t len, std::chrono::steady_clock::time_point deadline) {
    std::size_t off = 0;
    while (off < len) {
      auto remaining = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
      if (remaining.count() <= 0) throw TransportError("socket recv timed out");
      wait_readable(fd_.get(), remaining);
      ssize_t n = ::recv(fd_.get(), dst + off, len - off, 0);
      if (n == 0) throw TransportError("connection closed by peer");
      if (n < 0) throw TransportError(std::string("socket recv failed: ") + std::strerror(errno));
      off += static_cast<std::size_t>(n);
    }
  }

  Fd fd_;
};

class TcpListener : public Listener {
 public:
  explicit TcpListener(const std::string& endpoint) {
    SockAddr sa = parse_endpoint(endpoint);
    fd_ = Fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (fd_.get() < 0) throw TransportError("cannot create socket");
    int one = 1;
    ::setsockopt(fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd_.get(), reinterpret_cast<sockaddr*>(&sa.addr), sizeof sa.addr) != 0)
      throw TransportError("bind to " + endpoint + " failed: " + std::strerror(errno));
    if (::listen(fd_.get(), 128) != 0)
      throw TransportError(std::string("listen failed: ") + std::strerror(errno));
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd_.get(), reinterpret_cast<sockaddr*>(&bound), &len);
    char buf[INET_ADDRSTRLEN];
    inet_ntop(AF_INET, &bound.sin_addr, buf, sizeof buf);
    address_ = std::string(buf) + ":" + std::to_string(ntohs(bound.sin_port));
  }

  std::unique_ptr<MessageStream> accept(Millis timeout) override {
    wait_readable(fd_.get(), timeout);
    int client = ::accept(fd_.get(), nullptr, nullptr);
    if (client < 0) throw TransportError(std::string("accept failed: ") + std::strerror(errno));
    return std::make_unique<TcpStream>(Fd(client));
  }

  std::string address() const override { return address_; }

 private:
  Fd fd_;
  std::string address_;
};

}  // namespace

std::unique_ptr<Listener> tcp_listen(const std::string& endpoint) {
  return std::make_unique<TcpListener>(endpoint);
}

std::unique_ptr<MessageStream> tcp_dial(const std::string& endpoint, Millis timeout) {
  SockAddr sa = parse_endpoint(endpoint);
  auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    Fd fd(::socket(AF_INET, SOCK_STREAM, 0));
    if (fd.get() < 0) throw TransportError("cannot create socket");
    if (::connect(fd.get(), reinterpret_cast<sockaddr*>(&sa.addr), sizeof sa.addr) == 0)
      return std::make_unique<TcpStream>(std::move(fd));
    if (std::chrono::steady_clock::now() >= deadline)
      throw TransportError("connect to " + endpoint + " failed within timeout: " +
                           std::strerror(errno));
    // Coordinator may not be listening yet; retry until the deadline.
    struct timespec ts {0, 50 * 1000 * 1000};
    ::nanosleep(&ts, nullptr);
  }
}

}  // namespace glmd
