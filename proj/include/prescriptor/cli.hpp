// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_CLI_HPP
#define PRESCRIPTOR_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace prescriptor::cli
{

enum ExitCode : int
{
  kOk = 0,
  kDomainError = 1,
  kUsageError = 2,
  kProtocolViolation = 3,
};

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics and usage text to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

std::string version();

}  // namespace prescriptor::cli

#endif  // PRESCRIPTOR_CLI_HPP
