#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcv {

enum class ErrorCode {
  InvalidConfig,
  UnknownTime,
  ZeroBlockMass,
  IncompleteMarket,
  Arbitrage,
  InvalidSpec,
  InvalidLevel,
  NotMeasurable,
  NonpositiveNumeraire,
  EmptySet,
  InfeasibleBand,
  ConstructionFailed,
  PreconditionViolated,
  EmptyFamily,
  InvalidParam,
  SingularProjection,
  NotPureInsurance,
  OracleFailure,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the engine carries one of the codes above so that
/// callers (and the CLI) can branch on the category without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mcv
