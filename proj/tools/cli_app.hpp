#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace roughscale::cli {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Runs one command line (without the program name). Normal output goes to
/// `out`, diagnostics to `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roughscale::cli
