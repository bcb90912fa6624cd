#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hierdet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. args excludes the program name. Query output goes
/// to out as JSON; diagnostics and the usage synopsis go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hierdet::cli
