#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dsk::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDataError = 2,
  kNoConvergence = 3,
};

/// Runs one `dsk` invocation. `args` excludes the program name. Results go
/// to files; progress and diagnostics go to `err`, `info` output to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsk::cli
