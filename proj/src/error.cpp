#include "twfe/error.hpp"

namespace twfe {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidTreatment: return "InvalidTreatment";
    case ErrorCode::MixedTreatmentInCell: return "MixedTreatmentInCell";
    case ErrorCode::DuplicateObservation: return "DuplicateObservation";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Collinear: return "Collinear";
    case ErrorCode::DegenerateNormalizer: return "DegenerateNormalizer";
    case ErrorCode::PreconditionNotMet: return "PreconditionNotMet";
    case ErrorCode::ConstantCovariate: return "ConstantCovariate";
    case ErrorCode::ZeroDispersion: return "ZeroDispersion";
    case ErrorCode::NoNegativeWeight: return "NoNegativeWeight";
    case ErrorCode::ZeroBeta: return "ZeroBeta";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoSwitchers: return "NoSwitchers";
    case ErrorCode::NoPlaceboSwitchers: return "NoPlaceboSwitchers";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::TooFewGroups: return "TooFewGroups";
    case ErrorCode::AllDrawsDegenerate: return "AllDrawsDegenerate";
    case ErrorCode::MissingEstimate: return "MissingEstimate";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace twfe
