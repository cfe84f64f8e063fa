#include <iostream>

#include "sbmem/cli.hpp"

int main(int argc, char** argv) { return sbmem::run_cli(argc, argv, std::cout, std::cerr); }
