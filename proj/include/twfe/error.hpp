#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twfe {

enum class ErrorCode {
  EmptyInput,
  InvalidTreatment,
  MixedTreatmentInCell,
  DuplicateObservation,
  MissingCell,
  MissingColumn,
  ParseError,
  IoError,
  Collinear,
  DegenerateNormalizer,
  PreconditionNotMet,
  ConstantCovariate,
  ZeroDispersion,
  NoNegativeWeight,
  ZeroBeta,
  Infeasible,
  NoSwitchers,
  NoPlaceboSwitchers,
  HorizonTooLarge,
  TooFewGroups,
  AllDrawsDegenerate,
  MissingEstimate,
  InvalidConfig,
  InvalidArgument,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above, so
/// callers (and the CLI) can report the module error by name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace twfe
