#include <string>
#include <vector>

#include "g2t/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return g2t::run_cli(args);
}
