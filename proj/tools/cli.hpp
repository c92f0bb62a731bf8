#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mcv {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitUsage = 2 };

/// Runs the `mcv` command line. `args` excludes the program name. Results go
/// to `out` (or to --out files), diagnostics and witnesses to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcv
