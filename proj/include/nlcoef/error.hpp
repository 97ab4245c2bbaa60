#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlcoef {

/// Failure categories raised by the library. Each maps onto one of the
/// error conditions a caller is expected to handle distinctly.
enum class ErrorCode {
  InvalidArgument,
  NonConvergence,
  BlowUp,
  TraceMismatch,
  BadSensor,
  NonMonotone,
  DegenerateGradient,
  DegenerateFlux,
  RangeViolation,
  MissingAnchor,
  ParseError,
  UndefinedVariable,
  ConfigError,
  IoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::TraceMismatch: return "TraceMismatch";
    case ErrorCode::BadSensor: return "BadSensor";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::DegenerateFlux: return "DegenerateFlux";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::MissingAnchor: return "MissingAnchor";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UndefinedVariable: return "UndefinedVariable";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures of the numerical pipeline (as opposed to bad input).
  bool numerical() const noexcept {
    switch (code_) {
      case ErrorCode::NonConvergence:
      case ErrorCode::BlowUp:
      case ErrorCode::NonMonotone:
      case ErrorCode::DegenerateGradient:
      case ErrorCode::DegenerateFlux:
      case ErrorCode::RangeViolation:
      case ErrorCode::TraceMismatch:
        return true;
      default:
        return false;
    }
  }

private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) throw Error(code, msg);
}

}  // namespace nlcoef
