#include <iostream>

#include "crkl/cli.hpp"

int main(int argc, char** argv) { return crkl::cli::main(argc, argv, std::cout, std::cerr); }
