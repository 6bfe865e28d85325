#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace platoon::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;  // bad arguments, unreadable or invalid scenario, guard exceeded
inline constexpr int kNotCertified = 2;

/// Runs the platoon_game command line. args[0] is the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace platoon::cli
