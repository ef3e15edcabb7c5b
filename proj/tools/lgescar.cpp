#include <iostream>

#include "lge/commands.hpp"

int main(int argc, char** argv) {
  return lge::cli::run_cli(argc, argv, std::cout, std::cerr);
}
