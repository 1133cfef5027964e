#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ntpcap {

/// Runs the command line `args` (without the program name). Returns 0 on
/// success, 1 when an operation fails and 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ntpcap
