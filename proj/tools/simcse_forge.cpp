// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "simcse/cli.hpp"

int main(int argc, char** argv) {
    return simcse::cli::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
