#include "fusetrack/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return fusetrack::run_cli(argc, argv, std::cout, std::cerr); }
