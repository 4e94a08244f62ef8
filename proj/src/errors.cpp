#include "spectralforge/errors.hpp"

namespace spectralforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::NoDirection: return "NoDirection";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MatchingFailed: return "MatchingFailed";
    case ErrorCode::NoFeasibleChain: return "NoFeasibleChain";
    case ErrorCode::SingularSupport: return "SingularSupport";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooFewLevels: return "TooFewLevels";
    case ErrorCode::UnknownFigure: return "UnknownFigure";
  }
  return "Unknown";
}

}  // namespace spectralforge
