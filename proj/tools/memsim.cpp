#include <iostream>

#include "memsim/cli.hpp"

int main(int argc, char** argv) { return memsim::cli::main(argc, argv, std::cout, std::cerr); }
