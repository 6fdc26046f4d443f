#include <iostream>

#include "runner.hpp"

int main(int argc, char** argv) { return phasecov::cli::run_cli(argc, argv, std::cout, std::cerr); }
