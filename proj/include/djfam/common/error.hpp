#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace djfam {

enum class ErrorCode {
  kInvalidArgument,
  kNotFound,
  kPermissionDenied,
  kUnauthenticated,
  kConflict,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// Domain error raised by every module; the gateway maps `code()` onto an
/// HTTP status and the CLI onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace djfam
