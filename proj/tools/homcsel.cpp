#include "homcsel/cli.hpp"

int main(int argc, char** argv) { return homcsel::cli::run(argc, argv); }
