#pragma once

#include <iosfwd>

namespace sbmem {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitFailure = 2;

// Subcommands: rates, simulate, sweep, hopfield, oracle.
// Flags: --config PATH, --seed N, --out DIR.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sbmem
