#pragma once

#include <ostream>

namespace dlp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the `dlp` binary and the tests. Output that is not
/// redirected with --out goes to `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dlp::cli
