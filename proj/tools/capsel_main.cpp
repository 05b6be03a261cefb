#include <iostream>

#include "capsel/cli.hpp"

int main(int argc, char** argv) { return capsel::cli::run(argc, argv, std::cout, std::cerr); }
