#include "mcv/error.hpp"

namespace mcv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownTime: return "UnknownTime";
    case ErrorCode::ZeroBlockMass: return "ZeroBlockMass";
    case ErrorCode::IncompleteMarket: return "IncompleteMarket";
    case ErrorCode::Arbitrage: return "Arbitrage";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::NotMeasurable: return "NotMeasurable";
    case ErrorCode::NonpositiveNumeraire: return "NonpositiveNumeraire";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::InfeasibleBand: return "InfeasibleBand";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::SingularProjection: return "SingularProjection";
    case ErrorCode::NotPureInsurance: return "NotPureInsurance";
    case ErrorCode::OracleFailure: return "OracleFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace mcv
