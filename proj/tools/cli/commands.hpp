#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adadata::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInputError = 2,
    kTrainingFailure = 3,
};

// Runs one command line (without the program name) and returns the exit
// code. Never throws.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace adadata::cli
