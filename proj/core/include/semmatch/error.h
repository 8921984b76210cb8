#ifndef SEMMATCH_ERROR_H_
#define SEMMATCH_ERROR_H_

#include <stdexcept>
#include <string>

namespace semmatch {

enum class ErrorCode {
  kDimension,
  kContract,
  kNonFinite,
  kDegeneratePoint,
  kSingular,
  kInsufficientData,
  kRankDeficient,
  kEstimationFailure,
  kUndefinedMetric,
  kFormat,
  kIo,
  kDataset,
  kConfig,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace semmatch

#endif  // SEMMATCH_ERROR_H_
