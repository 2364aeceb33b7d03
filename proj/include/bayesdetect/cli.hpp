#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bayesdetect::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 2, kNumericFailure = 3 };

/// Runs the command line `bayesdetect <args...>` (args excludes the program name).
/// Reports go to `out`, diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Version string embedded in every output file.
std::string tool_version();

}  // namespace bayesdetect::cli
