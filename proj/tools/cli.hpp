#pragma once

#include <string>
#include <vector>

namespace nisyn::cli {

// Exit-code contract, stable across commands:
//   0  success / all checks pass
//   1  domain-level negative result (ineligible, refusal, failed verification,
//      unstable interconnection)
//   2  input error (parse, dimension, flag validation)
//   3  numerical failure
inline constexpr int kExitPass = 0;
inline constexpr int kExitNegative = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the nisyn command line. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace nisyn::cli
