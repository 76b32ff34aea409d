#include "duracast/error.hpp"

namespace duracast {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::SchemaViolation: return "schema_violation";
    case ErrorCode::MissingValue: return "missing_value";
    case ErrorCode::EmptySelection: return "empty_selection";
    case ErrorCode::DegenerateSplit: return "degenerate_split";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::UnfillableGap: return "unfillable_gap";
    case ErrorCode::Shape: return "shape";
    case ErrorCode::NoCoverage: return "no_coverage";
    case ErrorCode::TrainingFailure: return "training_failure";
    case ErrorCode::Divergence: return "divergence";
    case ErrorCode::InsufficientHistory: return "insufficient_history";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::UnitMismatch: return "unit_mismatch";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

}  // namespace duracast
