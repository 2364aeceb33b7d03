#include "bayesdetect/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return bayesdetect::cli::run(argc, argv, std::cout, std::cerr);
}
