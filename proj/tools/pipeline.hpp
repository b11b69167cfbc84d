#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gc4d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

/// Runs one subcommand. `args` excludes the program name. Results and error
/// objects go to `out` as JSON; `err` only receives human-oriented notes.
int run_pipeline(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gc4d::cli
