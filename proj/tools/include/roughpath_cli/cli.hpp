#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace roughpath::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIoError = 2,
  kConfigError = 3,
  kNumericalError = 4,
};

/// Runs one command line (args[0] is the program name). Summaries go to
/// `out`; error records (one JSON object per line) go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace roughpath::cli
