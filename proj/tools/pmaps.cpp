#include <iostream>

#include "pmaps/cli.hpp"

int main(int argc, char** argv) { return pmaps::cli::run(argc, argv, std::cout, std::cerr); }
