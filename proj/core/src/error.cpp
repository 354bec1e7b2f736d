#include "linucbd/error.hpp"

namespace linucbd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kGapViolation: return "gap_violation";
    case ErrorCode::kInvalidInstance: return "invalid_instance";
    case ErrorCode::kInstanceInfeasible: return "instance_infeasible";
    case ErrorCode::kInvalidConfig: return "invalid_config";
    case ErrorCode::kUnknownPreset: return "unknown_preset";
    case ErrorCode::kUnknownPolicy: return "unknown_policy";
    case ErrorCode::kDiversityViolation: return "diversity_violation";
    case ErrorCode::kNumericalFailure: return "numerical_failure";
    case ErrorCode::kSingularSystem: return "singular_system";
    case ErrorCode::kAsymmetricMatrix: return "asymmetric_matrix";
    case ErrorCode::kBoundViolation: return "bound_violation";
    case ErrorCode::kMissingEstimates: return "missing_estimates";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kParse: return "parse_error";
  }
  return "unknown";
}

}  // namespace linucbd
