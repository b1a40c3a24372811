#include "wecfarm/cli.hpp"

int main(int argc, char** argv) { return wecfarm::cli::run(argc, argv); }
