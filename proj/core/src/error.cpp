#include "gc4d/error.hpp"

namespace gc4d {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroQuaternion: return "ZeroQuaternion";
    case ErrorCode::FovOutOfRange: return "FovOutOfRange";
    case ErrorCode::EmptyScene: return "EmptyScene";
    case ErrorCode::QueryInvalid: return "QueryInvalid";
    case ErrorCode::FaceOutOfRange: return "FaceOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoSamples: return "NoSamples";
    case ErrorCode::NoValidPixels: return "NoValidPixels";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::IndivisibleResolution: return "IndivisibleResolution";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace gc4d
