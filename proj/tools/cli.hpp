#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rankmerge::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kAnnotation = 3,
  kScoreState = 4,
  kNoCommonFeatures = 5,
  kDegenerate = 6,
  kUnknownFeature = 7,
  kEmptyUniverse = 8,
  kIo = 9,
};

/// Runs one command line (args[0] is the program name). Messages go to out/err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rankmerge::cli
