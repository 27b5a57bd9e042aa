#include <vector>

#include "aml/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return aml::run_cli(std::move(args));
}
