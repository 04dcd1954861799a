#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kcomb {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  parse_error,
  infeasible,
  not_converged,
  numerical,
  io_error,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a stable code so the CLI can
// report it in machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kcomb
