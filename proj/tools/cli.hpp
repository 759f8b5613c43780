#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pipesizer::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kParse = 3,
  kSolver = 4,
  kInfeasible = 5,
};

// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pipesizer::cli
