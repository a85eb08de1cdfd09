#include "pfbart/cli.hpp"

int main(int argc, char** argv) { return pfbart::cli_main(argc, argv); }
