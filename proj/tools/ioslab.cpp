#include "ioslab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ioslab::run_cli(argc, argv, std::cout, std::cerr); }
