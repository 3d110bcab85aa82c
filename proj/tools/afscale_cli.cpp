#include <iostream>
#include <string>
#include <vector>

#include "afscale/cli.hpp"

int main(int argc, char** argv) {
    return afscale::cli::main_entry(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
