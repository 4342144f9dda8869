#include <iostream>

#include "fdsr/cli.hpp"

int main(int argc, char** argv) { return fdsr::cli::run(argc, argv, std::cout, std::cerr); }
