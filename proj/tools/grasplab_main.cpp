#include <string>
#include <vector>

#include "grasplab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return grasplab::cli::run_command(args);
}
