#include <iostream>

#include "mvplan/cli.hpp"

int main(int argc, char** argv) { return mvplan::run_cli(argc, argv, std::cout, std::cerr); }
