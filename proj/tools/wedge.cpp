#include <iostream>

#include "wedge/cli.hpp"

int main(int argc, char** argv) { return wedge::cli::run_main(argc, argv, std::cout, std::cerr); }
