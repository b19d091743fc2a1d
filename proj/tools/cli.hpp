#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mtp::cli {

/// Runs one command. `args` excludes the program name. Returns the process
/// exit status: 0 on success, 2 on invalid input, 3 when an estimator fails
/// or a budget runs out.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mtp::cli
