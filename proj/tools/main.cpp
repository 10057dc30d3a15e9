#include <iostream>

#include "relsynth/cli.hpp"

int main(int argc, char** argv) { return relsynth::cli::run_cli(argc, argv, std::cout, std::cerr); }
