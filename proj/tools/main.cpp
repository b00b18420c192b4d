#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
  rtmd::cli::apply_thread_cap();
  std::vector<std::string> args(argv + 1, argv + argc);
  return rtmd::cli::run(args, std::cout, std::cerr);
}
