#include "tmsnav/cli.hpp"

int main(int argc, char** argv) { return tmsnav::run_cli(argc, argv); }
