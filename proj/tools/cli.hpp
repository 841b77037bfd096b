#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace edoks::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,        // row-level failures, unexpected errors
  kDecodeError = 2,    // unreadable image or manifest
  kSizeMismatch = 3,   // image pair of different sizes
  kInvalidConfig = 4,  // bad flags / MetricConfig
};

/// Entry point shared by the `edoks` binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace edoks::cli
