#pragma once

#include <iosfwd>

namespace gmp::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kUsage = 2,
  kInputParse = 3,
  kNumerical = 4,
};

/// Entry point of the `gmp` command; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gmp::cli
