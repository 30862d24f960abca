#ifndef PAN_CLI_CLI_H
#define PAN_CLI_CLI_H

#include <iosfwd>
#include <string>
#include <vector>

namespace pan::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,
  kExitNoSolution = 2,  // non-convergence or infeasibility
  kExitUsage = 64,
};

// Entry point of the `pan` / `bosco` binaries. argv[0] is the program name.
int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string VersionString();

}  // namespace pan::cli

#endif  // PAN_CLI_CLI_H
