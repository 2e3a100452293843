#include <geolap/cli.hpp>

int main(int argc, char** argv) { return geolap::cli_run(argc, argv); }
