#include "cli.hpp"

int main(int argc, char** argv) { return mttsort::cli::run(argc, argv); }
