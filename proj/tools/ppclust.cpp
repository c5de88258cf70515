#include "cli.hpp"

int main(int argc, char** argv) { return ppclust::cli::run_cli(argc, argv); }
