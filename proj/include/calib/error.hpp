#pragma once

#include <stdexcept>
#include <string>

namespace calib {

/// Failure categories shared by all solvers and the file layer.
enum class ErrorCode {
  FrameMismatch,
  DegenerateMotion,
  DegeneratePlane,
  NotEnoughSamples,
  NoValidPairs,
  DegenerateMotionSet,
  NumericalFailure,
  DidNotConverge,
  NoSegmentFound,
  AmbiguousSegment,
  DegenerateGeometry,
  PlateNotVisible,
  SamplingFailed,
  ParseError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::DegenerateMotion: return "DegenerateMotion";
    case ErrorCode::DegeneratePlane: return "DegeneratePlane";
    case ErrorCode::NotEnoughSamples: return "NotEnoughSamples";
    case ErrorCode::NoValidPairs: return "NoValidPairs";
    case ErrorCode::DegenerateMotionSet: return "DegenerateMotionSet";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::DidNotConverge: return "DidNotConverge";
    case ErrorCode::NoSegmentFound: return "NoSegmentFound";
    case ErrorCode::AmbiguousSegment: return "AmbiguousSegment";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::PlateNotVisible: return "PlateNotVisible";
    case ErrorCode::SamplingFailed: return "SamplingFailed";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "UnknownError";
}

/// Exception type thrown by the library. what() always starts with the
/// error code name so callers (and the CLI) can match on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace calib
