#pragma once

#include <string>
#include <vector>

namespace pbp::app {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitConfig = 2,
    kExitProvider = 3,
    kExitPartial = 4,
};

/// Parses the command line, runs one command and maps failures to exit codes.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);

}  // namespace pbp::app
