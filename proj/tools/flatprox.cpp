#include <iostream>

#include "flatprox/cli.hpp"

int main(int argc, char** argv) {
  return flatprox::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
