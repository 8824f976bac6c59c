#pragma once

#include <string>
#include <vector>

namespace midorf {

// Exit codes: 0 success, 2 usage, 3 data validation / IO, 4 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Full CLI entry point (argv without the program name).
int run_cli(const std::vector<std::string>& args);

}  // namespace midorf
