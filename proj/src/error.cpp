#include "ppg/error.hpp"

namespace ppg {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInput: return "input_error";
    case ErrorCode::kDegenerateWeights: return "degenerate_weights";
    case ErrorCode::kUnsupportedModel: return "unsupported_model";
    case ErrorCode::kDomain: return "domain_error";
    case ErrorCode::kModelContract: return "model_contract";
    case ErrorCode::kNumerical: return "numerical_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "internal_error";
}

}  // namespace ppg
