#pragma once

#include <string>
#include <vector>

namespace obounds {

/// Entry point behind the obounds binary. Exit codes: 0 success, 2 input
/// or limit error, 3 model infeasibility.
int run_cli(const std::vector<std::string>& args);

}  // namespace obounds
