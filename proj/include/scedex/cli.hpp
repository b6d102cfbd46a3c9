#pragma once

#include <iosfwd>

namespace scedex::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv, runs one command and writes its result to `out` or to the
/// --output file (written atomically). Errors go to `err` as a JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scedex::cli
