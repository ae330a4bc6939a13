#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gph::cli {

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNumeric = 3;

/// Runs one gph subcommand. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gph::cli
