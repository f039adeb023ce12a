#include "cli.hpp"

int main(int argc, char** argv) { return lipread::cli::run(argc, argv); }
