#include "chainforge/cli/cli.hpp"

#include <iostream>

int main( int argc, char** argv )
{
    return chainforge::cli::run( argc, argv, std::cout, std::cerr );
}
