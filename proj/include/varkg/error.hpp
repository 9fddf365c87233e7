#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace varkg {

enum class ErrorCode {
  InvalidInput,
  InvalidParameter,
  InvalidMass,
  Unsupported,
  NumericalOverflow,
  GridMismatch,
  TruncationOverflow,
  BracketError,
  ConvergenceError,
  WrongRegion,
  NotOnConstraint,
  NoNegativeEndpoint,
  GluingFailed,
  NoRoot,
  PreconditionFailed,
  EmptyConstraintSample,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported as an Error carrying
// one of the codes above; callers switch on code() rather than on message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::InvalidMass: return "InvalidMass";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::NumericalOverflow: return "NumericalOverflow";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::TruncationOverflow: return "TruncationOverflow";
    case ErrorCode::BracketError: return "BracketError";
    case ErrorCode::ConvergenceError: return "ConvergenceError";
    case ErrorCode::WrongRegion: return "WrongRegion";
    case ErrorCode::NotOnConstraint: return "NotOnConstraint";
    case ErrorCode::NoNegativeEndpoint: return "NoNegativeEndpoint";
    case ErrorCode::GluingFailed: return "GluingFailed";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::EmptyConstraintSample: return "EmptyConstraintSample";
  }
  return "Unknown";
}

}  // namespace varkg
