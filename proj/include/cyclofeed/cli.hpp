#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cyclofeed {

/// Runs the command-line interface on args (without the program name).
/// Returns 0 pass, 2 fail, 3 inconclusive, 1 usage or I/O error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cyclofeed
