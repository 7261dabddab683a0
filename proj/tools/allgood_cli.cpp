#include "allgood/cli.hpp"

int main(int argc, char** argv) { return allgood::cli_main(argc, argv); }
