#include <iostream>

#include "gwt/cli.hpp"

int main(int argc, char** argv) { return gwt::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
