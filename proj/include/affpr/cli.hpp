#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affpr {

/// Exit codes: 0 success, 1 domain error (error JSON on err), 2 usage, I/O or
/// format error. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace affpr
