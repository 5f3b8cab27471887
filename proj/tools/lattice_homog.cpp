#include "lattice/cli.hpp"

int main(int argc, char** argv) { return lattice::cli::main_entry(argc, argv); }
