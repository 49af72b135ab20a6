#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace robofruit::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kConfigError = 3,  // configuration or GPR model
  kDataError = 4,
};

/// Parses "7", "1-100" and comma-separated mixes of both. Result is sorted
/// and free of duplicates. Throws InvalidConfig on malformed input.
std::vector<std::uint64_t> parse_seed_list(const std::vector<std::string>& specs);

/// Worker count from ROBOFRUIT_SIM_THREADS, else hardware concurrency.
unsigned worker_count();

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robofruit::cli
