#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectralforge {

enum class ErrorCode {
  InvalidArgument,
  DegenerateRange,
  DimensionMismatch,
  NotUnitary,
  NoDirection,
  Infeasible,
  IndexOutOfRange,
  MatchingFailed,
  NoFeasibleChain,
  SingularSupport,
  ParseError,
  TooFewLevels,
  UnknownFigure,
};

std::string_view to_string(ErrorCode code);

// Validation and domain failures. Internal invariant breaches use
// std::logic_error instead so callers can triage them separately.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spectralforge
