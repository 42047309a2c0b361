#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skewlab {

enum class ErrorCode {
  InvalidArgument,
  NonMonotonicFrequency,
  MalformedRecord,
  UnsupportedParameter,
  UnsupportedVersion,
  PortCountMismatch,
  GridMismatch,
  GridOutOfRange,
  SingularConversion,
  InsufficientBandwidth,
  NoCrossing,
  EmptyBand,
  EmptyInput,
  Io,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported as an Error carrying a typed code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace skewlab
