#include <dirc/cli/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return dirc::cli::main(argc, argv, std::cout, std::cerr); }
