#include <iostream>

#include "tbcnn/cli.hpp"

int main(int argc, char** argv) { return tbcnn::run_cli(argc, argv, std::cout, std::cerr); }
