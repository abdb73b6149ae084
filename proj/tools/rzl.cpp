#include <iostream>

#include "rzl/cli.hpp"

int main(int argc, char** argv) { return rzl::cli::run(argc, argv, std::cout, std::cerr); }
