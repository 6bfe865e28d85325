#include <iostream>
#include <string>
#include <vector>

#include "platoon_cli/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return platoon::cli::main(args, std::cout, std::cerr);
}
