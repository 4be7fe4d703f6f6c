#include "excloud/cli.hpp"

int main(int argc, char** argv) { return excloud::cli::main(argc, argv); }
