// diverge - command-line entry point

#include <iostream>

#include "diverge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return diverge::run_cli(args, std::cout, std::cerr);
}
