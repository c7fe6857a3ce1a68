#include <iostream>

#include "theftbench/cli.hpp"

int main(int argc, char** argv) { return theftbench::cli::run(argc, argv, std::cout, std::cerr); }
