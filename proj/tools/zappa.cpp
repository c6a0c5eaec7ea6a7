#include <iostream>

#include "zappa/cli.hpp"

int main(int argc, char** argv) { return zappa::run_cli(argc, argv, std::cout, std::cerr); }
