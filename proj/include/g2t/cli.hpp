#pragma once

#include <string>
#include <vector>

namespace g2t {

// Entry point of the command line tool, callable from tests. `args` holds
// the tokens after the program name. Returns the process exit code:
// 0 success, 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args);

} // namespace g2t
