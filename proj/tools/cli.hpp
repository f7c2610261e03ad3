#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bbmflow::cli {

enum ExitCode : int { kSuccess = 0, kVerifyFailed = 1, kUsage = 2, kRuntime = 3 };

/// args[0] is the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace bbmflow::cli
