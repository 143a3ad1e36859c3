#ifndef OMAC_ERROR_HPP_
#define OMAC_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace omac {

enum class ErrorCode {
  kInvalidInput,
  kMissingFile,
  kSizeMismatch,
  kNonFinite,
  kAlignmentViolation,
  kParse,
  kIo,
  kUsage,
};

const char* ToString(ErrorCode code);

// Every library failure surfaces as an Error carrying a code the CLI maps to
// an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace omac

#endif  // OMAC_ERROR_HPP_
