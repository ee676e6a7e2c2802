#include "cli.hpp"

int main(int argc, char** argv) { return sgq::cli::run(argc, argv); }
