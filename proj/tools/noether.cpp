#include <iostream>

#include "noether/cli.hpp"

int main(int argc, char** argv) { return noether::run_cli(argc, argv, std::cout, std::cerr); }
