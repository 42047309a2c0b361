#include "skewlab/error.hpp"

namespace skewlab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonMonotonicFrequency: return "NonMonotonicFrequency";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::UnsupportedParameter: return "UnsupportedParameter";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::PortCountMismatch: return "PortCountMismatch";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::GridOutOfRange: return "GridOutOfRange";
    case ErrorCode::SingularConversion: return "SingularConversion";
    case ErrorCode::InsufficientBandwidth: return "InsufficientBandwidth";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::EmptyBand: return "EmptyBand";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace skewlab
