#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dawnik::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // solver failure or collision expectation not met
inline constexpr int kExitBadInput = 2;

// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dawnik::cli
