#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nbsim::cli {

enum ExitCode : int {
    kOk = 0,
    kIngestError = 1,
    kQueryError = 2,
    kCorpusError = 3,
    kGuardFailure = 4,
};

/// Runs one command. `args[0]` is the program name. Usage errors exit with
/// kQueryError.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nbsim::cli
