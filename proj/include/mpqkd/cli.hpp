#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace mpqkd::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,        // bad flags or config
  kModelDomain = 3,  // operating point outside the model
  kIo = 4,
  kValidationFailed = 5,
};

inline constexpr std::uint64_t kMinValidationSamples = 100'000;

struct ValidationReport {
  nlohmann::ordered_json json;
  bool all_pass = false;
};

/// Runs every oracle check (pair rate and AD block Monte Carlo, enumeration
/// vs closed forms, closed-form lambda vs numeric minimiser).
ValidationReport run_validation(std::uint64_t seed, std::uint64_t samples, unsigned workers = 0);

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpqkd::cli
