#ifndef MPBCFW_CLI_HPP
#define MPBCFW_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace mpbcfw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs `mpbcfw <args...>` (args exclude the program name) and returns the
/// process exit status. Subcommands: train, gen, eval.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpbcfw::cli

#endif  // MPBCFW_CLI_HPP
