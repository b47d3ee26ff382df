#include "edgebench/cli.hpp"

int main(int argc, char** argv) {
    return edgebench::run_cli(argc, argv);
}
