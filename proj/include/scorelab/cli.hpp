// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scorelab::cli {

// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDomain = 2,
    kAllDiverged = 3,
    kVerifyFailed = 4,
};

// Entry point behind the `scorelab` executable. `args` excludes the program
// name. Commands: sample, diagnose, verify, sweep.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scorelab::cli
