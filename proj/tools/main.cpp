#include <iostream>

#include "robustdx/cli.hpp"

int main(int argc, char** argv) {
  return robustdx::run_cli(argc, argv, std::cout, std::cerr);
}
