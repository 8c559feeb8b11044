#include <iostream>

#include "cip/commands.hh"

int main(int argc, char **argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cip::run_cli(std::move(args), std::cout, std::cerr);
}
