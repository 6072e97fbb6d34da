#include "sgdlab/cli/dispatch.hpp"

int main(int argc, char** argv) { return sgdlab::cli::dispatch(argc, argv); }
