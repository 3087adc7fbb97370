#include <iostream>

#include "ddnoise/cli.hpp"

int main(int argc, char** argv) { return ddnoise::cli::run(argc, argv, std::cout, std::cerr); }
