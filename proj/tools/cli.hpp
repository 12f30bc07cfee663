#pragma once

#include <string>
#include <vector>

namespace sonic::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitNoConvergence = 3;

/// Environment variable naming the artifact directory (default: working directory).
inline constexpr const char* kOutputDirEnv = "SONIC_OUTPUT_DIR";

/// Runs `sonic <args...>`; args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace sonic::cli
