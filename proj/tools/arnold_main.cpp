#include "arnold/cli.hpp"

int main(int argc, char** argv) { return arnold::cli_main(argc, argv); }
