#include "benchfold/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return benchfold::run_cli(argc, argv, std::cout, std::cerr); }
