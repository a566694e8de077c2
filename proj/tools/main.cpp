#include <vector>

#include "reservelab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return reservelab::run_cli(args);
}
