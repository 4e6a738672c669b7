#pragma once

namespace polarsep::cli {

// Full command-line surface: synth | project | separate | eval | histmatch.
// Returns the process exit code (0 ok, 2 usage/config, 3 I/O, 4 numeric).
int run(int argc, const char* const* argv);

}  // namespace polarsep::cli
