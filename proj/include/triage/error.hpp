#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace triage {

/// Input data is missing, unreadable or inconsistent.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An external classifier backend failed (spawn, I/O, timeout, or an error frame).
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The backend answered with a frame that violates the wire protocol.
class ProtocolError : public BackendError {
 public:
  ProtocolError(const std::string& what, std::string line)
      : BackendError(what), line_(std::move(line)) {}
  const std::string& line() const { return line_; }

 private:
  std::string line_;
};

class QueryError : public std::runtime_error {
 public:
  QueryError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace triage
