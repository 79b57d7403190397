#pragma once

#include <string>
#include <vector>

namespace pseudobench {

// Command-line entry point (args exclude the program name). Returns the
// process exit code: 0 success, 2 usage/config error, 3 data error.
// Subcommands: synth, inspect, run, report.
int run_cli(const std::vector<std::string>& args);

}  // namespace pseudobench
