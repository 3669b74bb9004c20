#include <iostream>

#include "sqf/cli/app.hpp"

int main(int argc, char **argv) { return sqf::cli::run(argc, argv, std::cout, std::cerr); }
