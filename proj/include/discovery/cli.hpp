#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace discovery {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;   // bad flags, unreadable or malformed inputs
inline constexpr int kExitFailed = 2;  // task failure or backend error

/// Runs the `discover` tool. `args` excludes the program name. Results go to
/// `out` as tab-separated lines, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace discovery
