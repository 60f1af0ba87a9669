#include <iostream>

#include "flowgauge/cli/cli.hpp"

int main(int argc, char** argv) { return flowgauge::cli::run(argc, argv, std::cout, std::cerr); }
