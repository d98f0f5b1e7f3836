#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace rot::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kUsage = 2 };

/// Runs one rot_lab command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rot::cli
