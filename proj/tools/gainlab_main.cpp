#include <iostream>

#include "gainlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gainlab::cli::run(args, std::cout, std::cerr);
}
