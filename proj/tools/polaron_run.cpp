// polaron_run.cpp — command-line driver
#include "polaron/cli.hpp"

int main(int argc, char** argv) { return polaron::cli::main_entry(argc, argv); }
