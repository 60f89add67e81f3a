#include "ddec/cli.hpp"

int main(int argc, char** argv) { return ddec::run_cli(argc, argv); }
