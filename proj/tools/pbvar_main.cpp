#include "pbvar/pipeline.hpp"

#include <iostream>

int main(int argc, char** argv) { return pbvar::run_cli(argc, argv, std::cout, std::cerr); }
