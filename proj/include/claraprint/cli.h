#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace claraprint {

/// Entry point of the `claraprint` tool. `args` excludes the program name.
/// Returns the process exit status.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace claraprint
