#pragma once

#include <stdexcept>
#include <string>

namespace glmd {

// Stable numeric codes shared with the C API (see include/glmdist.h).
enum class ErrorCode : int {
  ok = 0,
  argument = 1,
  domain = 2,
  diverged = 3,
  not_positive_definite = 4,
  singular_fisher = 5,
  convergence = 6,
  transport = 7,
  protocol = 8,
  degenerate_knots = 9,
  io = 10,
  config = 11,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct ArgumentError : Error {
  explicit ArgumentError(const std::string& w) : Error(ErrorCode::argument, w) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorCode::domain, w) {}
};

// Linear predictor left the representable range (e.g. Poisson exp overflow).
struct DivergedInputError : Error {
  explicit DivergedInputError(const std::string& w) : Error(ErrorCode::diverged, w) {}
};

struct NotPositiveDefiniteError : Error {
  NotPositiveDefiniteError(const std::string& w, int pivot)
      : Error(ErrorCode::not_positive_definite, w), pivot_index(pivot) {}
  int pivot_index;
};

struct SingularFisherError : Error {
  explicit SingularFisherError(const std::string& w) : Error(ErrorCode::singular_fisher, w) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& w) : Error(ErrorCode::convergence, w) {}
};

struct TransportError : Error {
  explicit TransportError(const std::string& w, int worker = -1)
      : Error(ErrorCode::transport, w), worker_id(worker) {}
  int worker_id;
};

struct ProtocolError : Error {
  explicit ProtocolError(const std::string& w, std::size_t offset = 0)
      : Error(ErrorCode::protocol, w), byte_offset(offset) {}
  std::size_t byte_offset;
};

struct DegenerateKnotsError : Error {
  explicit DegenerateKnotsError(const std::string& w) : Error(ErrorCode::degenerate_knots, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCode::io, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCode::config, w) {}
};

}  // namespace glmd
