#include "omac/error.hpp"

namespace omac {

const char* ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid-input";
    case ErrorCode::kMissingFile:
      return "missing-file";
    case ErrorCode::kSizeMismatch:
      return "size-mismatch";
    case ErrorCode::kNonFinite:
      return "non-finite";
    case ErrorCode::kAlignmentViolation:
      return "alignment-violation";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kUsage:
      return "usage";
  }
  return "unknown";
}

}  // namespace omac
