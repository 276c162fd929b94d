#include <koba/cli.hpp>

int main(int argc, char **argv) { return koba::cli::run(argc, argv); }
