#include "polarsep/cli.hpp"

int main(int argc, char** argv) { return polarsep::cli::run(argc, argv); }
