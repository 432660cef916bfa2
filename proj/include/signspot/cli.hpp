#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace signspot::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  // bad flags, config, or unreadable files
inline constexpr int kExitData = 2;   // input failed schema or invariant checks

/// Runs one command. `args` excludes the program name, e.g.
/// {"bleu", "--hyp", "h.txt", "--ref", "r.txt"}. Reports go to `out` unless
/// --output names a file; diagnostics go to `err`. Nothing is written unless
/// every input validates.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace signspot::cli
