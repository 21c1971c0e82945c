#include <iostream>

#include "mmg/cli.hpp"

int main(int argc, char** argv) { return mmg::cli_main(argc, argv, std::cout, std::cerr); }
