#include "foreval/errors.hpp"

namespace foreval {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kIrregularTimestamps: return "IrregularTimestamps";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kInsufficientLength: return "InsufficientLength";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kDuplicateTaskName: return "DuplicateTaskName";
    case ErrorCode::kUnknownFrequency: return "UnknownFrequency";
    case ErrorCode::kNoFeasibleWindow: return "NoFeasibleWindow";
    case ErrorCode::kWindowCountMismatch: return "WindowCountMismatch";
    case ErrorCode::kHistoryTooShort: return "HistoryTooShort";
    case ErrorCode::kZeroScale: return "ZeroScaleError";
    case ErrorCode::kMissingQuantile: return "MissingQuantile";
    case ErrorCode::kZeroDenominator: return "ZeroDenominator";
    case ErrorCode::kBaselineIncomplete: return "BaselineIncomplete";
    case ErrorCode::kMissingTaskScore: return "MissingTaskScore";
    case ErrorCode::kZeroBaseline: return "ZeroBaselineError";
    case ErrorCode::kZeroReference: return "ZeroReferenceError";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kIncompleteSubmission: return "IncompleteSubmission";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kConflictingLeakageFlag: return "ConflictingLeakageFlag";
    case ErrorCode::kDataError: return "DataError";
  }
  return "UnknownError";
}

}  // namespace foreval
