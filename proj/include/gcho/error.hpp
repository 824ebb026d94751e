#pragma once

#include <stdexcept>
#include <string>

namespace gcho {

enum class ErrorCode {
  NonSymmetric,
  NonFinite,
  BadBracket,
  UnknownProblem,
  OnBoundary,
  MissingHessian,
  NoConvergence,
  DegenerateSeries,
  RootFindFailure,
  SubsolverFailure,
  OracleError,
  InvalidArgument,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadBracket: return "BadBracket";
    case ErrorCode::UnknownProblem: return "UnknownProblem";
    case ErrorCode::OnBoundary: return "OnBoundary";
    case ErrorCode::MissingHessian: return "MissingHessian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::RootFindFailure: return "RootFindFailure";
    case ErrorCode::SubsolverFailure: return "SubsolverFailure";
    case ErrorCode::OracleError: return "OracleError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gcho
