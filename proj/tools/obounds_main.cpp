#include <string>
#include <vector>

#include "obounds/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return obounds::run_cli(args);
}
