#include <iostream>

#include "supertwist/cli.hpp"

int main(int argc, char** argv) { return supertwist::cli::dispatch(argc, argv, std::cout, std::cerr); }
