#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace beltrami::cli {

/// Exit codes of run().
inline constexpr int exit_ok = 0;
inline constexpr int exit_violation = 1;
inline constexpr int exit_usage = 2;

/// Runs one subcommand. `args` excludes the program name. Reports go to the
/// --out directory as <command>.json (plus CSV data with --format csv).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

} // namespace beltrami::cli
