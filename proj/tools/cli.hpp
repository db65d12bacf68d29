#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lgc::cli {

/// Runs the lgcorr command line. args excludes the program name. Returns the
/// process exit code: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lgc::cli
