#pragma once
// Command-line front end. `run_cli` is the whole program minus process
// setup, so tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace thermoguard::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;   ///< runtime, load and configuration failures
inline constexpr int kExitAlerts = 2;  ///< monitor raised at least one alert
inline constexpr int kExitUsage = 64;  ///< malformed command line

/// Runs one command; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermoguard::cli
