#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mines {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  NonOrthonormal,
  NotPositiveDefinite,
  NonFiniteValue,
  EmptySpectrum,
  NonPositiveEigenvalue,
  BadLabel,
  NonPositiveTemp,
  IoError,
  ParseError,
  EmptyFile,
  OracleRequired,
  TheoryModeNeedsOracle,
  NonPositiveValue,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonOrthonormal: return "NonOrthonormal";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::EmptySpectrum: return "EmptySpectrum";
    case ErrorKind::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorKind::BadLabel: return "BadLabel";
    case ErrorKind::NonPositiveTemp: return "NonPositiveTemp";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::OracleRequired: return "OracleRequired";
    case ErrorKind::TheoryModeNeedsOracle: return "TheoryModeNeedsOracle";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code map) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mines
