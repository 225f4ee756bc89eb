#ifndef IQC_ERROR_HPP
#define IQC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace iqc {

enum class ErrorCode {
  DimensionMismatch,
  SingularResolvent,
  UnstableBlowup,
  Unsupported,
  InvalidSignature,
  StaticKind,
  MissingVariable,
  UnsupportedSet,
  UnsupportedCombination,
  NoPerformanceChannel,
  MembershipViolation,
  InfeasibleWitness,
  LinkOutOfRange,
  ParseError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularResolvent: return "SingularResolvent";
    case ErrorCode::UnstableBlowup: return "UnstableBlowup";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::InvalidSignature: return "InvalidSignature";
    case ErrorCode::StaticKind: return "StaticKind";
    case ErrorCode::MissingVariable: return "MissingVariable";
    case ErrorCode::UnsupportedSet: return "UnsupportedSet";
    case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
    case ErrorCode::NoPerformanceChannel: return "NoPerformanceChannel";
    case ErrorCode::MembershipViolation: return "MembershipViolation";
    case ErrorCode::InfeasibleWitness: return "InfeasibleWitness";
    case ErrorCode::LinkOutOfRange: return "LinkOutOfRange";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Single exception type for the library; the code identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace iqc

#endif  // IQC_ERROR_HPP
