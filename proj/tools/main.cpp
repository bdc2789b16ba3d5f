#include "rfseries/cli.hpp"

int main(int argc, char** argv) { return rfs::cli::run(argc, argv); }
