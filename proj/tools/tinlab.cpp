#include <iostream>

#include "tinlab/cli.hpp"

int main(int argc, char** argv)
{
    return tinlab::cli::run(argc, argv, std::cout, std::cerr);
}
