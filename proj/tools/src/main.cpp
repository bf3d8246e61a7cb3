#include "cli.hpp"

int main(int argc, char** argv) { return dtlstm::cli::run_main(argc, argv); }
