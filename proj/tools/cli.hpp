#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qfratio::cli {

/// Runs one command line (without the program name). Records go to `out`,
/// a JSON error object to `err`. Returns the process exit status:
/// 0 success, 1 malformed input, 2 unsupported instance, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfratio::cli
