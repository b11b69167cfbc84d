#include "pipeline.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gc4d::cli::run_pipeline(args, std::cout, std::cerr);
}
