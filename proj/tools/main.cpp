#include <iostream>

#include "gridbatch/cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gridbatch::cli::run_cli(args, std::cout, std::cerr);
}
