#include <string>
#include <vector>

#include "midorf/commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return midorf::run_cli(args);
}
