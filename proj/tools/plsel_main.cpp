#include <iostream>

#include "plsel/cli.hpp"

int main(int argc, char** argv) { return plsel::cli::run(argc, argv, std::cout, std::cerr); }
