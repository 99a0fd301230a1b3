#include <iostream>
#include <vector>

#include "bnc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return bnc::run_cli(args, std::cout, std::cerr);
}
