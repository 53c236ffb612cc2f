#ifndef ENGAGEMENT_ERROR_HPP_
#define ENGAGEMENT_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace engagement {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kOutOfRange,
  kNonFinite,
  kParse,
  kIo,
  kTooLarge,
  kNumeric,
  kInternal,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kTooLarge: return "too_large";
    case ErrorCode::kNumeric: return "numeric_error";
    case ErrorCode::kInternal: return "internal_error";
  }
  return "unknown";
}

// All library failures are reported through this exception. The code is
// stable and machine-readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace engagement

#endif  // ENGAGEMENT_ERROR_HPP_
