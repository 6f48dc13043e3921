#include <iostream>

#include "cpforge/cli.hpp"

int main(int argc, char** argv) { return cpforge::run_cli(argc, argv, std::cout, std::cerr); }
