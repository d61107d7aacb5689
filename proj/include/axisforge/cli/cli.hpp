#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace axisforge::cli {

// Runs one subcommand. `args` excludes the program name. Returns the process
// exit code: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// Usage text and diagnostics go to `err`; summaries go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace axisforge::cli
