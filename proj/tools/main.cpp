#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return skewar::cli::run(argc, argv, std::cout, std::cerr); }
