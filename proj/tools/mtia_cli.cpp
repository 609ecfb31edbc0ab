#include <string>
#include <vector>

#include "mtia/harness.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mtia::harness::run_command(args);
}
