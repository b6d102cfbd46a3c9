#include <iostream>

#include "scedex/cli.hpp"

int main(int argc, char** argv) { return scedex::cli::run(argc, argv, std::cout, std::cerr); }
