#include <iostream>

#include "roughpath_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return roughpath::cli::run(args, std::cout, std::cerr);
}
