#include <iostream>

#include "rieszlab/cli.hpp"

int main(int argc, char** argv) {
  return rieszlab::cli_main(argc, argv, std::cout, std::cerr);
}
