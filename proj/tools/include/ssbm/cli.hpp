#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ssbm::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kConvergence = 4,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssbm::cli
