#include <iostream>

#include "triprank/cli/cli.hpp"

int main(int argc, char** argv) { return triprank::cli::run(argc, argv, std::cout, std::cerr); }
