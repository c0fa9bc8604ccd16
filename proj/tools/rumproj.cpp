#include <iostream>

#include "rum/commands.hpp"

int main(int argc, char** argv) { return rum::run_cli(argc, argv, std::cout, std::cerr); }
