#include <iostream>
#include <string>
#include <vector>

#include "varkg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return varkg::cli::run(args, std::cout, std::cerr);
}
