#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace echo {

enum class ErrorCode {
  InvalidArgument,
  NonFinite,
  DegenerateRotation,
  ClipTooShort,
  EmptyInput,
  ShapeMismatch,
  MissingJointLimits,
  InvalidTimestep,
  UnsupportedScheduler,
  MissingFeature,
  ConstraintViolation,
  NotInvolution,
  EmptyLibrary,
  NonUnitVector,
  Io,
  Format,
  BadMagic,
  BadVersion,
  Truncated,
  UnknownType,
  Malformed,
  Timeout,
  ProtocolViolation,
  UnknownPrompt,
  BackendFailure,
  Cancelled,
  Connection,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DegenerateRotation: return "DegenerateRotation";
    case ErrorCode::ClipTooShort: return "ClipTooShort";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingJointLimits: return "MissingJointLimits";
    case ErrorCode::InvalidTimestep: return "InvalidTimestep";
    case ErrorCode::UnsupportedScheduler: return "UnsupportedScheduler";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::ConstraintViolation: return "ConstraintViolation";
    case ErrorCode::NotInvolution: return "NotInvolution";
    case ErrorCode::EmptyLibrary: return "EmptyLibrary";
    case ErrorCode::NonUnitVector: return "NonUnitVector";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
    case ErrorCode::UnknownPrompt: return "UnknownPrompt";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::Cancelled: return "Cancelled";
    case ErrorCode::Connection: return "Connection";
  }
  return "Unknown";
}

/// Every failure in the library surfaces as an Error carrying a stable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace echo
