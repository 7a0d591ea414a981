#pragma once

// The tflab command line: verify, classify, gen, analyze, plot, abc.

#include <iosfwd>
#include <string>
#include <vector>

namespace tflab::cli {

// Exit codes. Verdicts map to 0/1/2; everything else is 64 and up.
inline constexpr int kProven = 0;
inline constexpr int kRefuted = 1;
inline constexpr int kUnknown = 2;
inline constexpr int kUsage = 64;
inline constexpr int kDataError = 65;
inline constexpr int kIoError = 66;
inline constexpr int kInternal = 70;

/// args excludes the program name. Results go to `out` (or --out), the
/// effective-config line and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tflab::cli
