#include <iostream>
#include <string>
#include <vector>

#include "klb/harness.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return klb::run_cli(args, std::cout, std::cerr);
}
