#include "annealil/harness/cli.hpp"

int main(int argc, char** argv) { return annealil::harness::cli(argc, argv); }
