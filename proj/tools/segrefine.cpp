#include "segrefine/cli.hpp"

int main(int argc, char** argv) { return segrefine::cli::run(argc, argv); }
