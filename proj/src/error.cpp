#include "safe/error.hpp"

namespace safe {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::FileMissing: return "FileMissing";
    case Errc::MalformedRaster: return "MalformedRaster";
    case Errc::UnitError: return "UnitError";
    case Errc::TransformFailure: return "TransformFailure";
    case Errc::NoCoverage: return "NoCoverage";
    case Errc::NegativeInput: return "NegativeInput";
    case Errc::DegenerateLink: return "DegenerateLink";
    case Errc::PathTooShort: return "PathTooShort";
    case Errc::FrequencyOutOfRange: return "FrequencyOutOfRange";
    case Errc::DistanceOutOfRange: return "DistanceOutOfRange";
    case Errc::HeightOutOfRange: return "HeightOutOfRange";
    case Errc::InvalidProfile: return "InvalidProfile";
    case Errc::InvalidParameter: return "InvalidParameter";
    case Errc::NonpositiveStep: return "NonpositiveStep";
    case Errc::NegativeDepth: return "NegativeDepth";
    case Errc::ThetaOutOfRange: return "ThetaOutOfRange";
    case Errc::UncalibratedParameters: return "UncalibratedParameters";
    case Errc::EmptyRegion: return "EmptyRegion";
    case Errc::CoordinateOutOfRange: return "CoordinateOutOfRange";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::MixedTransmitters: return "MixedTransmitters";
    case Errc::NoValidBins: return "NoValidBins";
    case Errc::UsageError: return "UsageError";
    case Errc::IoError: return "IoError";
    case Errc::ParseError: return "ParseError";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
  }
  return "Unknown";
}

}  // namespace safe
