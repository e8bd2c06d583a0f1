#pragma once

#include <string>
#include <vector>

namespace homcsel::cli {

// Runs the homcsel command-line tool. Returns the process exit code:
// 0 ok, 1 unexpected failure, 2 validation or usage, 3 io, 4 numerical,
// 5 degenerate selection.
int run(int argc, const char* const* argv);

// Same, for in-process callers; args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace homcsel::cli
