#include "levyglass/cli.hpp"

int main(int argc, char** argv) { return levyglass::run_cli(argc, argv); }
