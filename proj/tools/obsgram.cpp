#include "obsgram/cli.hpp"

int main(int argc, char** argv) { return obsgram::run_cli(argc, argv); }
