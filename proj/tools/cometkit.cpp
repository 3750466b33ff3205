#include <iostream>

#include "cometkit/cli.hpp"

int main(int argc, char** argv) {
  return cometkit::cli::run(argc, argv, std::cout, std::cerr);
}
