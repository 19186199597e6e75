#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace reachck {

// Exit codes of the command-line driver.
enum ExitCode : int {
    kExitOk = 0,
    kExitTypeError = 1,
    kExitParseError = 2,
    kExitOracleFailure = 3,
    kExitIoError = 10,
    kExitUsage = 64,
};

// args excludes the program name.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace reachck
