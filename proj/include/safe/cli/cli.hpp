#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "safe/error.hpp"

namespace safe::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kUsageExitCode = 2;

// UsageError -> 2, every other error code -> 10 + its numeric value.
int exit_code_for(Errc code) noexcept;

// Runs one subcommand: predict, coverage, profile, ret-curve, validate or
// sweep-ret-limit. argv excludes the program name. Results go to `out`,
// failures to `err` as a JSON object. Returns the process exit status.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace safe::cli
