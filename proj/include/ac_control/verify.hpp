#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ac_control/config.hpp"

namespace ac {

/// Outcome of one acceptance check.
struct CheckResult {
    int criterion = 0;
    std::string name;
    bool passed = false;
    std::string summary;
    nlohmann::json details;
    double seconds = 0.0;

    nlohmann::json to_json() const;
};

/// Number of acceptance checks; criterion ids run 1..check_count().
int check_count() noexcept;

/// Name of check `criterion` (1-based), e.g. "energy_inequality".
std::string check_name(int criterion);

/// Runs one check on the configured problem. Solver failures inside a check are
/// reported as a failed check, not thrown. Throws ConfigError on a bad criterion id.
CheckResult run_check(const RunConfig& config, int criterion);

/// All checks in order.
std::vector<CheckResult> run_all(const RunConfig& config);

}  // namespace ac
