#include "cli.hpp"

int main(int argc, char** argv) { return bbmflow::cli::dispatch(argc, argv); }
