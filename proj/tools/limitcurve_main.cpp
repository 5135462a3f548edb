#include "limitcurve/cli/runner.hpp"

int main(int argc, char** argv) { return limitcurve::cli::run(argc, argv); }
