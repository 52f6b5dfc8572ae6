#include <qjo/cli.hpp>

#include <iostream>


int main(int argc, char **argv)
{
    return qjo::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
