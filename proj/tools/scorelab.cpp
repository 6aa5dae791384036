#include "scorelab/cli.hpp"

int main(int argc, char** argv) { return scorelab::cli::main(argc, argv); }
