#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace safe {

// Every failure surfaced by the library carries one of these codes. The CLI
// maps each code to a distinct exit status, so keep the order stable.
enum class Errc {
  FileMissing = 1,
  MalformedRaster,
  UnitError,
  TransformFailure,
  NoCoverage,
  NegativeInput,
  DegenerateLink,
  PathTooShort,
  FrequencyOutOfRange,
  DistanceOutOfRange,
  HeightOutOfRange,
  InvalidProfile,
  InvalidParameter,
  NonpositiveStep,
  NegativeDepth,
  ThetaOutOfRange,
  UncalibratedParameters,
  EmptyRegion,
  CoordinateOutOfRange,
  EmptyInput,
  MixedTransmitters,
  NoValidBins,
  UsageError,
  IoError,
  ParseError,
  ChecksumMismatch,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace safe
