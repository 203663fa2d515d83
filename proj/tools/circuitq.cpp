#include "circuitq/cli.hpp"

int main(int argc, char** argv) { return circuitq::cli::run(argc, argv); }
