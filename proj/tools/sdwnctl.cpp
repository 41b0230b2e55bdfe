#include <iostream>

#include "sdwn/cli.hpp"

int main(int argc, char** argv) { return sdwn::cli_main(argc, argv, std::cout, std::cerr); }
