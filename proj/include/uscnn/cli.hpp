#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uscnn::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  ///< I/O or other runtime failure
inline constexpr int kExitUsage = 2;    ///< bad flags, dimension mismatch, invalid values

/// Entry point for `uscnn <detect|lmr|eval|sweep-k> ...`. `args` excludes the
/// program name. Verbose progress goes to `err` when USCNN_VERBOSE is set to
/// a non-empty value other than "0".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uscnn::cli
