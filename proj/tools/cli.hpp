#ifndef COHERENTIA_TOOLS_CLI_HPP
#define COHERENTIA_TOOLS_CLI_HPP

#include <iosfwd>
#include <span>
#include <string>

namespace coherentia::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kVerificationFailure = 3,
};

// Runs one subcommand. args excludes the program name, e.g.
// {"score", "--model", "m.txt", ...}.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace coherentia::cli

#endif  // COHERENTIA_TOOLS_CLI_HPP
