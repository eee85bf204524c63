#pragma once

// Command-line front end. Exit codes: 0 success, 1 runtime failure,
// 2 usage or configuration error.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rcb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootVar = "RCB_OUTPUT_ROOT";

/// Runs one command; args exclude the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SuiteResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Property suites behind `verify`: indifference, oracle-delta, expectile,
/// gradients. `corrupt` runs the meta-test (not available for gradients),
/// which must fail.
SuiteResult run_suite(const std::string& suite, std::uint64_t seed, bool corrupt = false);
std::vector<std::string> suite_names();

}  // namespace rcb::cli
