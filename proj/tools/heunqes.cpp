#include "heunqes/cli.hpp"

int main(int argc, char** argv) { return heunqes::cli::main(argc, argv); }
