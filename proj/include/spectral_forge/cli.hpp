#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spectral_forge {

/// Exit codes: 0 all checks pass, 1 a checked property fails, 2 usage or parse error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spectral_forge
