#include "eegloc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return eegloc::cli::run(argc, argv, std::cout, std::cerr); }
