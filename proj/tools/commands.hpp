#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rtmd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the `rtmd` command line with the given arguments (argv[0] excluded)
/// and returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies the RTMD_THREADS environment cap to OpenMP, if set.
void apply_thread_cap();

}  // namespace rtmd::cli
