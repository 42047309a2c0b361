#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace skewlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime error or partial batch failure
inline constexpr int kExitUsage = 2;

/// Runs one command. `args` excludes the program name. Data goes to `out`
/// (or the --out file), diagnostics and usage to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hz value with optional k/m/g suffix (case-insensitive, optional "hz"):
/// "106.25g", "53.125GHz", "1e9".
double parse_frequency(std::string_view text);

}  // namespace skewlab::cli
