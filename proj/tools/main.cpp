#include "gssl/cli.hpp"

int main(int argc, char** argv) { return gssl::run_cli(argc, argv); }
