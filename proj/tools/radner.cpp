#include "radner/cli/cli.hpp"

int main(int argc, char** argv) { return radner::cli::run_cli(argc, argv); }
