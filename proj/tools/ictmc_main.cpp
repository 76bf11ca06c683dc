#include <iostream>

#include "ictmc/cli.hpp"

int main(int argc, char** argv) {
  return ictmc::cli::run(argc, argv, std::cout, std::cerr);
}
