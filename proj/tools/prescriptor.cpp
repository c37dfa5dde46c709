// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/cli.hpp"

#include <iostream>

int main(int argc, char **argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  return prescriptor::cli::run(args, std::cout, std::cerr);
}
