#include <iostream>

#include "fnirs/cli.hpp"

int main(int argc, char** argv) {
  return fnirs::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
