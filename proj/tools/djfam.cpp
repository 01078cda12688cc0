#include <iostream>

#include "djfam/cli/commands.hpp"

int main(int argc, char** argv) { return djfam::cli::run(argc, argv, std::cout, std::cerr); }
