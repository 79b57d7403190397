#include <string>
#include <vector>

#include "pseudobench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pseudobench::run_cli(args);
}
