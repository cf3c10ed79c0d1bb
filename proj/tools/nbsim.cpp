#include <iostream>
#include <string>
#include <vector>

#include "nbsim/cli.hpp"

int main(int argc, char** argv) {
    return nbsim::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
