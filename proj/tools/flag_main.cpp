#include "flag/cli.hpp"

int main(int argc, char** argv) {
    return flag::cli::run(argc, argv);
}
