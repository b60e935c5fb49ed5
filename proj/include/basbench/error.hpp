#pragma once

#include <stdexcept>
#include <string>

namespace basbench {

enum class ErrorCode {
  DimensionMismatch,
  MissingParameter,
  InvalidParameter,
  UnknownMode,
  UnknownId,
  DanglingChannel,
  DuplicateBinding,
  AlgebraicCycle,
  NonAffine,
  ParseError,
  InvalidArgument,
  Unbounded,
  Infeasible,
  NonDeterministic,
  MissingKey,
};

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the category without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace basbench
