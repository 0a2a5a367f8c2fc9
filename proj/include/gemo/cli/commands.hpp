// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gemo::cli {

/// Parses `args` (without the program name) and runs the chosen subcommand.
/// Returns the process exit status; errors are reported on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gemo::cli
