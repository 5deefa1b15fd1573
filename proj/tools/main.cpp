#include <iostream>
#include <string>
#include <vector>

#include "nldof/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return nldof::cli::run(args, std::cout, std::cerr);
}
