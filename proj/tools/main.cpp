#include <iostream>
#include <vector>

#include "refinery/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return refinery::run_command(args, std::cout, std::cerr);
}
