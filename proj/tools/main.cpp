#include "popt/cli.hpp"

int main(int argc, char** argv) { return popt::run_command(argc, argv); }
