#include "signflow/cli.hpp"

int main(int argc, char** argv) { return signflow::cli::run_cli(argc, argv); }
