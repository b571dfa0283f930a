#include "siv/cli.hpp"

int main(int argc, char** argv) { return siv::cli_dispatch(argc, argv); }
