#include "arblink/cli.hpp"

int main(int argc, char** argv) { return arblink::cli_main(argc, argv); }
