#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace boxtrack {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 on input, format or usage errors and 2 on numerical failures.
/// Every subcommand writes a JSON run manifest; `replay --manifest <json>`
/// re-executes the recorded command line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace boxtrack
