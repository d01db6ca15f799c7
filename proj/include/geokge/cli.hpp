#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geokge {

inline constexpr const char* kVersion = "0.1.0";

enum ExitStatus : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Entry point for the `geokge` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geokge
