#include <iostream>

#include "uvac/cli.hpp"

int main(int argc, char* argv[]) { return uvac::cli::run(argc, argv, std::cout, std::cerr); }
