#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace einglue::cli {

// Runs one CLI invocation. args excludes the program name. Returns the
// process exit status: 0 success, 2 usage/configuration error, 3 numeric
// failure. Reports go to the --out path (atomically) or to out; diagnostics
// go to err as a JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace einglue::cli
