#include <iostream>

#include "ign/cli/cli.hpp"

int main(int argc, char** argv) {
    return ign::cli::run(argc, argv, std::cout, std::cerr);
}
