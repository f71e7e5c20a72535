#pragma once

#include <stdexcept>
#include <string>

namespace hubforge {

enum class ErrorCode {
  NonPositiveWeight,
  MissingRng,
  UnsupportedSpec,
  DivergentMoment,
  TableOutOfRange,
  InvalidWeight,
  EmptyStructure,
  CapExceeded,
  ExplosionSuspected,
  DivergentExpectation,
  Precondition,
  NotFound,
  Config,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Numeric precondition failures map to CLI exit code 3, config errors to 2.
inline bool is_numeric_precondition(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
      return false;
    default:
      return true;
  }
}

}  // namespace hubforge
