#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace amod::cli {

/// Runs the `amod` command line. `args` excludes the program name.
/// Returns 0 on success, 2 on usage errors and 1 on runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count for scenario-level parallelism, from AMOD_WORKERS
/// (unset: 1; 0: hardware concurrency).
unsigned worker_count();

}  // namespace amod::cli
