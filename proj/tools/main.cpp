#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return donorcnot::cli::run(std::vector<std::string>(argv, argv + argc), std::cerr);
}
