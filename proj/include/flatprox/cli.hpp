#pragma once

#include <iosfwd>

namespace flatprox {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitVerificationFailed = 2;
inline constexpr int kExitInconclusive = 3;

/// Runs the `flatprox` command line. Output goes to `out` unless --output is
/// given; diagnostics go to `err` as a single line.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flatprox
