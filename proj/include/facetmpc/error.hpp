#pragma once

#include <stdexcept>
#include <string>

namespace facetmpc {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  SingularMatrix,
  NotPositiveDefinite,
  Infeasible,
  NumericalFailure,
  NonConvergence,
  EmptyInput,
  DegenerateRow,
  OutsideFeasibleSet,
  GenerationExhausted,
  InfeasibleOcp,
  InfeasibleLocalOcp,
  Io,
};

const char* to_string(ErrorCode code);

/// True for errors caused by bad input rather than numerical trouble.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace facetmpc
