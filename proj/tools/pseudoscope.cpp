#include <iostream>

#include "pseudoscope/cli.hpp"

int main(int argc, char** argv) {
    return pseudoscope::cli::run(argc, argv, std::cout, std::cerr);
}
