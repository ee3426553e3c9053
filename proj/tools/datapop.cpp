#include <iostream>

#include "datapop/cli.hpp"

int main(int argc, char** argv) { return datapop::cli::run(argc, argv, std::cout, std::cerr); }
