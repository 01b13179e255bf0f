#include <iostream>

#include "structkit/cli.hpp"

int main(int argc, char** argv)
{
    return structkit::run_cli(argc, argv, std::cout, std::cerr);
}
