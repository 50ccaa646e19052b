#include "slpe/cli.hpp"

int main(int argc, char** argv) { return slpe::cli::dispatch(argc, argv); }
