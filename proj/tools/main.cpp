#include "lvr/cli.hpp"

int main(int argc, char** argv) { return lvr::cli::main_entry(argc, argv); }
