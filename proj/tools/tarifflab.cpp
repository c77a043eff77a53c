#include <iostream>

#include "tarifflab/cli.hpp"

int main(int argc, char** argv) { return tarifflab::run_cli(argc, argv, std::cout, std::cerr); }
