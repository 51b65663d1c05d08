#include <iostream>

#include "qsi/cli.hpp"

int main(int argc, char** argv)
{
    return qsi::cli::run(argc, argv, std::cout, std::cerr);
}
