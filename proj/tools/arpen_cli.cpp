#include "arpen/io.hpp"

#include <iostream>

int main(int argc, char** argv) { return arpen::run_cli(argc, argv, std::cout, std::cerr); }
