#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace emtk {

// Runs one emtk subcommand. `args` excludes the program name. Returns 0 on
// success, 1 on a toolkit error (printed to `err` as a single
// "error: code=<Code> message=<text>" line) and 2 on a usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emtk
