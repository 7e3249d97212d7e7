#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kbest {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitParams = 2, kExitOracleDiff = 3, kExitInvalidTd = 4 };

/// Runs the command line (args excludes the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kbest
