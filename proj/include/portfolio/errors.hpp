#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace portfolio {

enum class ErrorCode {
  ParseError,
  NonPositivePrice,
  InsufficientHistory,
  DuplicateAsset,
  LeadingGap,
  NonFiniteValue,
  ZeroVariance,
  InvalidArgument,
  TargetOutOfRange,
  Infeasible,
  MaxIterations,
  NumericalBreakdown,
  AssetAlignment,
};

/// Coarse grouping used for process exit codes.
enum class ErrorClass { Usage, Ingestion, Infeasible, Alignment };

ErrorClass error_class(ErrorCode code) noexcept;
std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorClass category() const noexcept { return error_class(code_); }

 private:
  ErrorCode code_;
};

}  // namespace portfolio
