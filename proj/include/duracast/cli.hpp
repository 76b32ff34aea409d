#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace duracast::cli {

/// Runs one command line (without the program name). Returns the process
/// exit status; failures print a single `error code=<name> message=<text>`
/// line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace duracast::cli
