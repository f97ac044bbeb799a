#pragma once

#include <stdexcept>
#include <string>

namespace rsmix {

enum class ErrorCode {
  EmptyInput,
  InvalidArgument,
  Parse,
  Io,
  Config,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure the library reports is an rsmix::Error; parsers never throw
// anything else on malformed input.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace rsmix
