#include "helixlab/sweep.hpp"

int main(int argc, char** argv) { return helixlab::run_cli(argc, argv); }
