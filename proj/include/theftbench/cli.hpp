#pragma once

#include <iosfwd>

namespace theftbench::cli {

// Runs `theftbench <subcommand> ...`. Reports go to `out`, logs and errors
// to `err`. Exit codes: 0 success, 2 I/O, 3 validation, 4 numeric, 1 other.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace theftbench::cli
