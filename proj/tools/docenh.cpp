#include <iostream>

#include "docenh/cli.hpp"

int main(int argc, char** argv) {
  return docenh::cli::dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
