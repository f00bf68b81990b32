#pragma once

#include <string>
#include <vector>

namespace delaystab {

/// Runs the delaystab command line: analyze | simulate | verify | probe |
/// char-eval. Returns the process exit code (0 ok; 2 bad input; 3 numerical
/// failure; 4 inconsistent verdict).
int run_cli(const std::vector<std::string>& args);

}  // namespace delaystab
