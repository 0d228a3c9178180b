#include "phaseplane/cli.hpp"

int main(int argc, char** argv) { return phaseplane::cli::run(argc, argv); }
