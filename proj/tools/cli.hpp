#pragma once

#include <iosfwd>

namespace fedasm::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kInvalidInstance = 3,
  kPrecondition = 4,
  kNonConvergence = 5,
  kIo = 6,
};

/// Entry point of the `fedasm` tool. Artifacts without an output path go
/// to `out`; diagnostics go to `err` as one JSON object per line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fedasm::cli
