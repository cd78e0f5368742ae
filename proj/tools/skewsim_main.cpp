#include <iostream>

#include "skewsim/cli.hpp"

int main(int argc, char** argv) { return skewsim::cli::run(argc, argv, std::cout, std::cerr); }
