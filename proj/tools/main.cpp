#include <iostream>

#include <binbci/cli.hpp>

int main(int argc, char** argv)
{
    return binbci::cli::run(argc, argv, std::cout, std::cerr);
}
