#include "heliosim/cli.hpp"

#include <iostream>
#include <vector>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return heliosim::cli::cli_main(args, std::cout, std::cerr);
}
