#include "rrsens/cli.hpp"

int main(int argc, char** argv) { return rrsens::cli::run(argc, argv); }
