#include "pmart/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return pmart::cli::run(argc, argv, std::cout, std::cerr);
}
