#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace linucbd {

enum class ErrorCode {
  kDimensionMismatch,
  kGapViolation,
  kInvalidInstance,
  kInstanceInfeasible,
  kInvalidConfig,
  kUnknownPreset,
  kUnknownPolicy,
  kDiversityViolation,
  kNumericalFailure,
  kSingularSystem,
  kAsymmetricMatrix,
  kBoundViolation,
  kMissingEstimates,
  kIo,
  kParse,
};

/// Stable snake_case name used in machine-readable error output.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace linucbd
