#include <iostream>

#include "superdyn/scenario.hpp"

int main(int argc, char** argv) {
  return superdyn::cli::run(argc, argv, std::cout, std::cerr);
}
