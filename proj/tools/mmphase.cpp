#include <iostream>

#include "mmphase/cli.hpp"

int main(int argc, char** argv) { return mmphase::cli::run(argc, argv, std::cout, std::cerr); }
