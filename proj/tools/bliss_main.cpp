#include "bliss/cli.hpp"

int main(int argc, char** argv) { return bliss::dispatch(argc, argv); }
