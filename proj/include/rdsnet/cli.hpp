#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rdsnet::cli {

enum ExitCode : int {
    success = 0,
    internal_error = 1,
    input_error = 2,
    fit_error = 3,
};

/// Runs the `rdsnet` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdsnet::cli
