#include <iostream>
#include <string>
#include <vector>

#include "mathemb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mathemb::run_cli(args, std::cin, std::cout, std::cerr);
}
