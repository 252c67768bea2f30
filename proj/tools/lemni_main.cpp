#include "cli_support.hpp"

int main(int argc, char** argv) { return lemni::cli::run_cli(argc, argv); }
