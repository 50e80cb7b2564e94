#include <iostream>

#include "latdisc/cli.hpp"

int main(int argc, char** argv) { return latdisc::cli::run_cli(argc, argv, std::cout); }
