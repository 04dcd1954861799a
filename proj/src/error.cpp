#include "kcomb/error.hpp"

namespace kcomb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::not_converged: return "not_converged";
    case ErrorCode::numerical: return "numerical";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

}  // namespace kcomb
