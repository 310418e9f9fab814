#pragma once

#include <stdexcept>
#include <string>

namespace nodalab {

enum class ErrorCode {
  invalid_argument,
  unsupported_geometry,
  dimension_mismatch,
  zero_field,
  resolution,
  degenerate_denominator,
  zero_data,
  non_monic,
  not_in_prepared_form,
  parse_error,
  config_error,
};

const char* to_string(ErrorCode code);

/// All library failures are reported through this exception; `code()`
/// identifies the failure class named in the module contracts.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nodalab
