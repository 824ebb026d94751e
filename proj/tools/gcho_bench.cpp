#include "gcho/bench.hpp"

int main(int argc, char** argv) { return gcho::cli_main(argc, argv); }
