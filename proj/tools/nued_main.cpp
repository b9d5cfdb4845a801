#include "nued/cli/app.hpp"

int main(int argc, char** argv) { return nued::cli::run_cli(argc, argv); }
