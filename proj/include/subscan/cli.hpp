#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace subscan {

// Runs the command-line interface. `args` is the argument list without the
// program name. All normal output goes to `out`, diagnostics to `err`.
// Returns the process exit code: 0 success, 1 validation error, 2 I/O error.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

} // namespace subscan
