#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace copo::cli {

enum ExitCode : int { ok = 0, runtime_failure = 1, usage_error = 2 };

/// Runs the `copo` command line. args[0] is the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace copo::cli
