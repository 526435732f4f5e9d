#include "sdelay/cli.hpp"

int main(int argc, char** argv) { return sdelay::cli::dispatch(argc, argv); }
