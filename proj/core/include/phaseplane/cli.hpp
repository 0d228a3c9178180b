#pragma once

#include <string>
#include <vector>

namespace phaseplane::cli {

// Runs one command (wavelet-verify, gen-tiles, decompose, tile-type,
// carleson-pairing, converge, major-subset, report) and writes its artifacts.
// Exit codes: 0 success, 2 config validation failure, 3 numerical-floor
// violation, 1 any other error.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

inline constexpr const char* kVersion = "phaseplane 0.1.0";

}  // namespace phaseplane::cli
