#include "semmatch/error.h"

namespace semmatch {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimension: return "dimension error";
    case ErrorCode::kContract: return "contract error";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kDegeneratePoint: return "degenerate point";
    case ErrorCode::kSingular: return "singular matrix";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kRankDeficient: return "rank deficiency";
    case ErrorCode::kEstimationFailure: return "estimation failure";
    case ErrorCode::kUndefinedMetric: return "undefined metric";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kIo: return "io error";
    case ErrorCode::kDataset: return "dataset error";
    case ErrorCode::kConfig: return "config error";
  }
  return "error";
}

}  // namespace semmatch
