#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pairclone::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kRuntimeError = 4,
};

// Parses argv (argv[0] is the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pairclone::cli
