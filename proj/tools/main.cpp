#include "mucos/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mucos::run_cli(argc, argv, std::cout, std::cerr); }
