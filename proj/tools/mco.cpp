#include <iostream>

#include "mcopt/cli.hpp"

int main(int argc, char** argv) { return mcopt::cli::run_cli(argc, argv, std::cout, std::cerr); }
