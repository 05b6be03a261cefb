#pragma once

#include <iosfwd>

namespace capsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitResourceLimit = 4;

/// Runs the command line. Output files are written directly; everything
/// else goes to `out` and diagnostics to `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace capsel::cli
