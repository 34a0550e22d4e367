#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shapeboost {

enum class ErrorCode {
  kInvalidParameter,
  kInvalidInput,
  kInvalidModel,
  kEmptyModel,
  kParseError,
  kUnsupportedMulticlass,
  kUnsupported,
  kInternal,
};

std::string_view to_string(ErrorCode code);

// All recoverable failures in the library are reported through this type.
// Solver status problems that are expected (infeasible, unbounded) are
// reported in-band instead; see LpStatus.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

}  // namespace shapeboost
