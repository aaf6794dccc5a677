#include <iostream>
#include <string>
#include <vector>

#include "splitgibbs/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return splitgibbs::run_cli(args, std::cout, std::cerr);
}
