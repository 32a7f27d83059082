#pragma once

#include <stdexcept>
#include <string>

namespace grassfilt {

enum class ErrorCode {
  DuplicateEdge,
  SelfLoop,
  NegativeWeight,
  IndexOutOfRange,
  ZeroDegree,
  DegenerateFeatures,
  NotSymmetric,
  KOutOfRange,
  RankOutOfRange,
  CutLocus,
  RankDeficientTangent,
  BaseMismatch,
  DuplicateNodes,
  DimensionMismatch,
  ZeroFeatureVector,
  SingularNormalEquations,
  EmptyValidation,
  EmptyMask,
  MissingLabels,
  ConfigInvalid,
  ConvergenceFailure,
  IoError,
  InvalidArgument,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ZeroDegree: return "ZeroDegree";
    case ErrorCode::DegenerateFeatures: return "DegenerateFeatures";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::KOutOfRange: return "KOutOfRange";
    case ErrorCode::RankOutOfRange: return "RankOutOfRange";
    case ErrorCode::CutLocus: return "CutLocus";
    case ErrorCode::RankDeficientTangent: return "RankDeficientTangent";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::DuplicateNodes: return "DuplicateNodes";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroFeatureVector: return "ZeroFeatureVector";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::EmptyValidation: return "EmptyValidation";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Library-wide exception carrying a machine-checkable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace grassfilt
