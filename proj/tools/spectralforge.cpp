#include "cli.hpp"

int main(int argc, char** argv) { return spectralforge::cli::run(argc, argv); }
