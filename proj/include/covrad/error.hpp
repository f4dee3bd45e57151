#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace covrad {

enum class ErrorCode {
  kInvalidArgument,
  kUnsupportedDomain,
  kNoSharpConstant,
  kInvalidGeometry,
  kResourceLimit,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kUnsupportedDomain: return "unsupported-domain";
    case ErrorCode::kNoSharpConstant: return "no-sharp-constant";
    case ErrorCode::kInvalidGeometry: return "invalid-geometry";
    case ErrorCode::kResourceLimit: return "resource-limit";
  }
  return "unknown";
}

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace covrad
