#include "cli/commands.hpp"

int main(int argc, char** argv) { return lpf::cli::run(argc, argv); }
