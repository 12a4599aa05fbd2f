#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plsel::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2 };

/// Entry point shared by the executable and the tests. The envelope goes to
/// --out when given (human summary on `out`), otherwise to `out` with the
/// summary on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with args excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plsel::cli
