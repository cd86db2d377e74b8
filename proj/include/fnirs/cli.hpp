#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fnirs {

/// Entry point behind the `fnirs` executable. Returns 0 on success, 2 on a
/// usage error, 1 on a runtime failure. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fnirs
