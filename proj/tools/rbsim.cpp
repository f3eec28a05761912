#include <iostream>

#include "cmech/cli.hpp"

int main(int argc, char** argv) { return cmech::cli::run(argc, argv, std::cout, std::cerr); }
