#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msdpool::cli {

/// Runs the command line (without the program name). Returns the process exit
/// code: 0 on success, 1 on invalid input, 2 on I/O failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string usage();

}  // namespace msdpool::cli
