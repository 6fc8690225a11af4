#include "rdpg_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rdpg::cli::run(argc, argv, std::cout, std::cerr); }
