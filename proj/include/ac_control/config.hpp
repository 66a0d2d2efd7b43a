#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ac_control/control.hpp"
#include "ac_control/limits.hpp"

namespace ac {

/// Closed-form initial or target profile:
///   constant(c), sine(a, k) = a sin(pi k x / L), tanh(s [, x0]) = tanh((x - x0) / s),
/// optionally wrapped in clamp(...) to [-1, 1].
struct FieldSpec {
    enum class Kind { constant, sine, tanh };
    Kind kind = Kind::constant;
    double a = 0.0;  // constant value, sine amplitude, or tanh width
    double b = 0.0;  // sine wavenumber or tanh center
    bool clamped = false;

    Field evaluate(const Grid& grid) const;
    std::string to_string() const;
};

FieldSpec parse_field_spec(std::string_view text);

struct RunConfig {
    // [grid]
    double half_length = 1.0;
    long cells = 200;
    // [time]
    double horizon = 1.0;
    long steps = 20;
    // [physics]
    PhysicsParams physics;
    // [regularization]
    FluxKind flux_kind = FluxKind::hyperbola;
    double epsilon = 0.25;
    ConstraintKind constraint_kind = ConstraintKind::c1_piecewise;
    double delta = 0.25;
    // [reaction]
    double a3 = 1.0;
    double a1 = -1.0;
    double a0 = 0.0;
    // [data]
    FieldSpec initial{FieldSpec::Kind::sine, 0.8, 1.0, true};
    FieldSpec target{FieldSpec::Kind::tanh, 0.2, 0.0, false};
    // [solver]
    StepOptions solver;
    // [optimize]
    OptimizeOptions optimize;
    long fd_directions = 5;
    double fd_lambda = 1e-5;
    double taylor_lambda = 1e-3;
    // [continuation]
    long levels = 8;
    double eps_floor = 0.0;
    double delta_floor = 0.0;
    std::vector<double> rhos{0.1};
    // [output]
    std::string output_dir = "ac-control-out";
    std::uint64_t seed = 1;

    Schedule schedule() const { return default_schedule(static_cast<int>(levels), eps_floor, delta_floor); }
    /// Canonical key = value text; parsing it gives back an identical config.
    std::string to_text() const;
    /// Same content as to_text(), one object per section.
    nlohmann::json to_json() const;
};

/// Parses key = value text with [section] headers. Throws ConfigError with
/// "<origin>:<line>: ..." on syntax errors, unknown keys and type mismatches.
/// Does not check the modelling assumptions; see build_setup.
RunConfig parse_config_text(std::string_view text, std::string_view origin = "<config>");

/// Reads a config file. A JSON file (a previous report.json) is accepted when it
/// carries a "config" object, which makes report.json a reproducible rerun input.
/// Throws ConfigError, and AssumptionError naming the failed assumption (A1)-(A6).
RunConfig parse_config(const std::filesystem::path& path);

/// Applies the same validation as parse_config to a JSON config object.
RunConfig parse_config_json(const nlohmann::json& config, std::string_view origin = "<json>");

/// Builds the grid, data fields and regularizations. Throws ConfigError on
/// structural problems (grid, field lengths). Does not run the assumption checks.
ModelSetup build_setup(const RunConfig& config);

/// build_setup followed by require_valid.
ModelSetup build_validated_setup(const RunConfig& config);

}  // namespace ac
