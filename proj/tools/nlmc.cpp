#include "nlmc/cli/commands.hpp"

int main(int argc, char** argv) { return nlmc::cli::run(argc, argv); }
