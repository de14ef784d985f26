#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gridbatch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;    ///< I/O, parse, schema or option error
inline constexpr int kExitNumeric = 2;  ///< non-convergence or verify threshold exceeded

/// Runs `gridbatch <args...>` (program name excluded). Artifacts go to `out`
/// unless --out names a file; diagnostics go to `err` as
/// `error[E_<CODE>]: message`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridbatch::cli
