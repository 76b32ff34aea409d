#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace duracast {

enum class ErrorCode {
  Io,
  Parse,
  SchemaViolation,
  MissingValue,
  EmptySelection,
  DegenerateSplit,
  InvalidArgument,
  UnfillableGap,
  Shape,
  NoCoverage,
  TrainingFailure,
  Divergence,
  InsufficientHistory,
  Domain,
  UnitMismatch,
  Config,
};

/// Stable machine-readable name, used by the CLI on its error line.
std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace duracast
