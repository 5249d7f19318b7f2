#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace charshock {

/// Failure categories shared by every module. The CLI and the sweep harness
/// report these names verbatim.
enum class ErrorKind {
  OutOfDomain,
  InvalidParameter,
  PastShock,
  CflViolation,
  NonFiniteField,
  NoBlowupTrend,
  DegenerateSoundSpeed,
  InvalidWidth,
  GridTooCoarse,
  EosDomain,
  NonFinite,
  InterpolationOutOfRange,
  ShockDetected,
  NonPositiveMu,
  SingularEndpoint,
  NoRootBeforeSigma,
  ConfigInvalid,
  IoError,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::PastShock: return "PastShock";
    case ErrorKind::CflViolation: return "CflViolation";
    case ErrorKind::NonFiniteField: return "NonFiniteField";
    case ErrorKind::NoBlowupTrend: return "NoBlowupTrend";
    case ErrorKind::DegenerateSoundSpeed: return "DegenerateSoundSpeed";
    case ErrorKind::InvalidWidth: return "InvalidWidth";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::EosDomain: return "EosDomain";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InterpolationOutOfRange: return "InterpolationOutOfRange";
    case ErrorKind::ShockDetected: return "ShockDetected";
    case ErrorKind::NonPositiveMu: return "NonPositiveMu";
    case ErrorKind::SingularEndpoint: return "SingularEndpoint";
    case ErrorKind::NoRootBeforeSigma: return "NoRootBeforeSigma";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace charshock
