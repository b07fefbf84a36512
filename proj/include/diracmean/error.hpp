#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diracmean {

enum class ErrorCode {
  BadGenerator,
  QuantileDomain,
  InsufficientSample,
  RankUnsupported,
  RankExceeded,
  NegativeDensity,
  WeightOverflow,
  NonFiniteInput,
  EmptyAccumulator,
  CylinderViolation,
  AsymmetricMatrix,
  NonpositiveWidth,
  NoConvergence,
  DegenerateOracle,
  UnsupportedMoment,
  CertificationFailed,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadGenerator: return "BadGenerator";
    case ErrorCode::QuantileDomain: return "QuantileDomain";
    case ErrorCode::InsufficientSample: return "InsufficientSample";
    case ErrorCode::RankUnsupported: return "RankUnsupported";
    case ErrorCode::RankExceeded: return "RankExceeded";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::WeightOverflow: return "WeightOverflow";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::EmptyAccumulator: return "EmptyAccumulator";
    case ErrorCode::CylinderViolation: return "CylinderViolation";
    case ErrorCode::AsymmetricMatrix: return "AsymmetricMatrix";
    case ErrorCode::NonpositiveWidth: return "NonpositiveWidth";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DegenerateOracle: return "DegenerateOracle";
    case ErrorCode::UnsupportedMoment: return "UnsupportedMoment";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace diracmean
