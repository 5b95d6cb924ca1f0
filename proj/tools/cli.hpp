#pragma once

#include <string>
#include <vector>

namespace lineart::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeFailure = 1;
inline constexpr int kUsageError = 2;

// Runs one `lineart` command line (args excludes the program name) and returns the exit
// code. Messages go to stdout/stderr.
int run(const std::vector<std::string>& args);

}  // namespace lineart::cli
