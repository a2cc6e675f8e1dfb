#include "cli.hpp"

int main(int argc, char** argv) { return moqc::cli::run(argc, argv); }
