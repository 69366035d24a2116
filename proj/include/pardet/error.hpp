#pragma once

#include <stdexcept>
#include <string>

namespace pardet {

enum class ErrorCode {
  // configuration / input validation
  ConfigError,
  BadRatios,
  // domain invariants
  ClassMismatch,
  NotArticulable,
  OpeningOutOfRange,
  DegenerateExtent,
  DegenerateYaw,
  EmptyMesh,
  EmptySet,
  EmptyDataset,
  EmptyAfterFilter,
  MissingSourceIds,
  NotNormalized,
  RegionTooSmall,
  PlacementFailure,
  TooFewQueries,
  TooManyTargets,
  NoGroundTruth,
  InvariantViolation,
  // filesystem / parsing
  MeshParseError,
  IoError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// CLI contract: 0 success, 2 config error, 3 invariant violation, 4 I/O error.
inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::BadRatios:
      return 2;
    case ErrorCode::MeshParseError:
    case ErrorCode::IoError:
      return 4;
    default:
      return 3;
  }
}

}  // namespace pardet
