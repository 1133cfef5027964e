#include <iostream>

#include "ntpcap/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ntpcap::run(args, std::cout, std::cerr);
}
