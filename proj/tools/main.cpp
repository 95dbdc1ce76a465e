#include "cli.hpp"

int main(int argc, char** argv) { return fiberchan::cli::run_cli(argc, argv); }
