#include <iostream>

#include "omac/cli.hpp"

int main(int argc, char** argv) {
  return omac::RunCli(argc, argv, std::cout, std::cerr);
}
