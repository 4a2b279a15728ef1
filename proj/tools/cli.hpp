#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace popnet::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericalError = 4,
};

// Runs one command line (args[0] is the program name). Reports go to `out`,
// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace popnet::cli
