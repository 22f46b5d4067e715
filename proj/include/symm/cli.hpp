#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace symm::cli {

// Runs the `symm` command line. Documents go to -o paths or, when absent, to
// `out`; diagnostics go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace symm::cli
