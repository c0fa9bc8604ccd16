#pragma once

// The rumproj command line. Exit codes: 0 success, 1 input or configuration
// error, 2 non-convergence (or a gradient check above tolerance), 3 degenerate
// instance. Every flag can also be set through an environment variable named
// RUMPROJ_<FLAG> (upper case, dashes as underscores); a flag on the command
// line wins over the environment.

#include <iosfwd>

namespace rum {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNonConvergence = 2;
inline constexpr int kExitDegenerate = 3;

/// Largest n accepted without --large.
inline constexpr int kDefaultMaxAlternatives = 12;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rum
