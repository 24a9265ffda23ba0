#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace donorcnot::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;  // protocol-verify found a mismatch
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

/// Runs the tool on argv-style arguments (args[0] is the program name).
/// Progress goes to `log`; artifacts go to the output directory.
int run(const std::vector<std::string>& args, std::ostream& log);

}  // namespace donorcnot::cli
