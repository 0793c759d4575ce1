#include "frameopt/cli.hpp"

int main(int argc, char** argv) { return frameopt::cli_main(argc, argv); }
