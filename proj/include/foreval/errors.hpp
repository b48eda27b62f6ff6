#ifndef FOREVAL_ERRORS_HPP
#define FOREVAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace foreval {

// Every recoverable failure in the library is reported as an Error carrying
// one of these codes. CLI commands map them to exit status 1 with the
// message on stderr.
enum class ErrorCode {
  // dataset
  kMissingColumn,
  kIrregularTimestamps,
  kEmptyDataset,
  kInsufficientLength,
  // task / config
  kSchemaError,
  kDuplicateTaskName,
  kUnknownFrequency,
  kNoFeasibleWindow,
  kWindowCountMismatch,
  // metrics / baselines
  kHistoryTooShort,
  kZeroScale,
  kMissingQuantile,
  kZeroDenominator,
  // aggregation
  kBaselineIncomplete,
  kMissingTaskScore,
  kZeroBaseline,
  kZeroReference,
  kNonConvergence,
  // submissions
  kIncompleteSubmission,
  kShapeMismatch,
  kConflictingLeakageFlag,
  // anything else (I/O, malformed data values, ...)
  kDataError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace foreval

#endif  // FOREVAL_ERRORS_HPP
