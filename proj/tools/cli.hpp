#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace refdiff::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

/// Runs one command line (args excludes the program name). Normal output
/// goes to `out`, diagnostics to `err`. Returns the process exit code:
/// 0 success, 1 validation or verification failure, 2 usage error or
/// malformed JSON.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace refdiff::cli
