#include <iostream>

#include "speclab/cli.hpp"

int main(int argc, char** argv) { return speclab::run_cli(argc, argv, std::cout, std::cerr); }
