// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "gemo/cli/commands.hpp"

int main(int argc, char** argv) {
  return gemo::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
