#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace heunmcv::cli {

/// Entry point of the `heunmcv` tool. `args` excludes the program name.
/// Writes the JSON report to `out` (or the file named by --out) and
/// diagnostics to `err`. Returns the process exit code: 0 on success, 1 on
/// input or usage errors, 2 when a requested verification missed its
/// tolerance.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heunmcv::cli
