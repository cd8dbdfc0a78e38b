#include <iostream>

#include "graphcp/cli.hpp"

int main(int argc, char** argv) { return graphcp::run_cli(argc, argv, std::cout, std::cerr); }
