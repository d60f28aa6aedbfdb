#include "portfolio/errors.hpp"

namespace portfolio {

ErrorClass error_class(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::NonPositivePrice:
    case ErrorCode::InsufficientHistory:
    case ErrorCode::DuplicateAsset:
    case ErrorCode::LeadingGap:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::ZeroVariance:
      return ErrorClass::Ingestion;
    case ErrorCode::TargetOutOfRange:
    case ErrorCode::Infeasible:
    case ErrorCode::MaxIterations:
    case ErrorCode::NumericalBreakdown:
      return ErrorClass::Infeasible;
    case ErrorCode::AssetAlignment:
      return ErrorClass::Alignment;
    case ErrorCode::InvalidArgument:
      break;
  }
  return ErrorClass::Usage;
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::DuplicateAsset: return "DuplicateAsset";
    case ErrorCode::LeadingGap: return "LeadingGap";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TargetOutOfRange: return "TargetOutOfRange";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::AssetAlignment: return "AssetAlignmentError";
  }
  return "Unknown";
}

}  // namespace portfolio
