#ifndef OMAC_CLI_HPP_
#define OMAC_CLI_HPP_

#include <iosfwd>

#include "omac/error.hpp"

namespace omac {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

int ExitCodeFor(ErrorCode code);

// Entry point of the `omac` tool: generate, compress and marc subcommands.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace omac

#endif  // OMAC_CLI_HPP_
