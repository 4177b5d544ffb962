#include <iostream>

#include <cotmom/cli.hpp>

int main(int argc, char** argv) {
    return cotmom::cli::run_argv(argc, argv, std::cout, std::cerr);
}
