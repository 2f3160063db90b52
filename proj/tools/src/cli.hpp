#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gkf::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

// Runs `gkf <args...>` (args excludes the program name). Diagnostics go to
// `err`, summaries and tables to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gkf::cli
