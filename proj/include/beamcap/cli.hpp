#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace beamcap::cli {

// Runs one CLI invocation (subcommands: solve, sweep, verify, ergodic).
// Returns the process exit code: 0 success, 1 input error, 2 verification or
// certification failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace beamcap::cli
