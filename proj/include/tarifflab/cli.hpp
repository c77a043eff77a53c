#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tarifflab {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitInput = 2,
  kExitInfeasible = 3,
  kExitCheckFailed = 4,
};

/// Entry point of the `tarifflab` tool. `argv[0]` is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with arguments after the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tarifflab
