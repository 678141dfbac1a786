#include "lexvar/cli.hpp"

int main(int argc, char** argv) { return lexvar::cli::run_cli(argc, argv); }
