#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vvote {

enum class ErrorCode {
  Parameter,
  Encoding,
  Decode,
  NotFound,
  Conflict,
  Unavailable,
  Validation,
  Signature,
  Format,
  State,
};

std::string_view to_string(ErrorCode code);

/// Base error for every failure reported by the library. The code lets
/// callers (and the HTTP layer) branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace vvote
