#include <iostream>

#include "pan/cli/cli.h"

int main(int argc, char** argv) { return pan::cli::Run(argc, argv, std::cout, std::cerr); }
