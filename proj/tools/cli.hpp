#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rema::cli {

/// Runs one command line. Returns the process exit code: 0 on success,
/// 2 for usage errors, 1 for everything else. Diagnostics go to `err` as
/// a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rema::cli
