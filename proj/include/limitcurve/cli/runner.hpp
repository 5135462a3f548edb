#pragma once

#include <string>
#include <vector>

namespace limitcurve::cli {

/// Command-line entry point. Exit codes: 0 success, 2 configuration error,
/// 3 solver failure without usable output, 4 analysis finished without
/// convergence (partial outputs written).
int run(int argc, const char* const* argv);

/// Convenience overload for tests; args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace limitcurve::cli
