#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace caero::cli {

// Entry point shared by the executable and the tests. args excludes the program name.
// Exit codes: 0 success, 1 runtime or storage failure, 2 usage or invalid input.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace caero::cli
