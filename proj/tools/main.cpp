#include "oblab/runner.hpp"

int main(int argc, char** argv) { return oblab::run_cli(argc, argv); }
