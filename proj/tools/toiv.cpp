#include "toiv/cli/app.hpp"

int main(int argc, char** argv) { return toiv::cli::run(argc, argv); }
