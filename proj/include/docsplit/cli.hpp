#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace docsplit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the command line `args` (without the program name). Help and usage
/// text go to `out` and `err` respectively.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace docsplit::cli
