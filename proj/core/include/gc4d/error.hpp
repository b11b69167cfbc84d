#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gc4d {

enum class ErrorCode {
  InvalidArgument,
  ZeroQuaternion,
  FovOutOfRange,
  EmptyScene,
  QueryInvalid,
  FaceOutOfRange,
  ShapeMismatch,
  NonPositiveSigma,
  EmptyReference,
  EmptyCloud,
  TooFewPoints,
  DegenerateScale,
  DegenerateConfiguration,
  NoSamples,
  NoValidPixels,
  TargetOutOfRange,
  IndivisibleResolution,
  BadMagic,
  UnsupportedVersion,
  UnsupportedDtype,
  TruncatedPayload,
  MalformedHeader,
  MalformedInput,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto a JSON error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gc4d
