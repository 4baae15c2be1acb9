#include "fnlab/cli.hpp"

int main(int argc, char** argv) { return fnlab::cli::main(argc, argv); }
