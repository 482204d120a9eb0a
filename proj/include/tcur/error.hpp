#pragma once

#include <stdexcept>
#include <string>

namespace tcur {

/// Failure categories; the CLI maps them onto exit codes.
enum class ErrorKind {
  kInvalidArgument,  // precondition violated by the caller
  kConfig,           // configuration rejected before compute
  kNumerical,        // numerical breakdown (inversion lost, non-finite data, ...)
  kInternal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::kInvalidArgument, what);
}

}  // namespace tcur
