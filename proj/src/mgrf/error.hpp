#pragma once

#include <stdexcept>
#include <string>

namespace mgrf {

enum class ErrorKind {
  InvalidArgument = 1,
  Io = 2,
  Format = 3,
  Runtime = 4,
  Unsupported = 5,
};

// All library failures are reported through this type; the C API maps kind()
// onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace mgrf
