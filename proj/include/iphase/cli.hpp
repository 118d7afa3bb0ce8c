#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace iphase {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitPass = 0, kExitToleranceFailure = 1, kExitUsage = 2 };

/// Runs one command line (without the program name). Documents go to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iphase
