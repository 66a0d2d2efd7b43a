/// Acceptance runner: one line per criterion on the default problem (or --config).
/// Exit status is 0 only when every selected criterion passes.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ac_control/config.hpp"
#include "ac_control/errors.hpp"
#include "ac_control/verify.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria for ac_control"};
    std::string config_path;
    std::vector<int> criteria;
    app.add_option("--config", config_path, "Config file (default problem when omitted)")->check(CLI::ExistingFile);
    app.add_option("--criterion", criteria, "Criterion ids to run (all when omitted)")
        ->check(CLI::Range(1, ac::check_count()));
    CLI11_PARSE(app, argc, argv);

    ac::RunConfig config;
    try {
        if (!config_path.empty()) config = ac::parse_config(config_path);
    } catch (const ac::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    if (criteria.empty()) {
        for (int c = 1; c <= ac::check_count(); ++c) criteria.push_back(c);
    }

    bool all = true;
    for (int c : criteria) {
        const ac::CheckResult r = ac::run_check(config, c);
        all = all && r.passed;
        std::printf("criterion %2d %-26s %s  %s (%.2fs)\n", r.criterion, r.name.c_str(), r.passed ? "PASS" : "FAIL",
                    r.summary.c_str(), r.seconds);
        if (!r.passed) std::printf("  details: %s\n", r.details.dump().c_str());
    }
    return all ? 0 : 3;
}
