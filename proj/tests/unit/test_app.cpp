#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "ac_control/config.hpp"
#include "ac_control/errors.hpp"
#include "ac_control/io.hpp"
#include "ac_control/verify.hpp"
#include "support.hpp"

using namespace ac;
using doctest::Approx;

namespace {

constexpr const char* minimal = "[grid]\nL = 1.0\nJ = 200\n\n[time]\nT = 1.0\nn = 20\n";

std::string error_text(const std::string& text) {
    try {
        (void)build_validated_setup(parse_config_text(text, "run.toml"));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
    const RunConfig c = parse_config_text(minimal);
    CHECK(c.epsilon == 0.25);
    CHECK(c.delta == 0.25);
    CHECK(c.flux_kind == FluxKind::hyperbola);
    CHECK(c.constraint_kind == ConstraintKind::c1_piecewise);
    CHECK(c.a3 == 1.0);
    CHECK(c.a1 == -1.0);
    CHECK(c.a0 == 0.0);
    CHECK(c.physics.nu == 0.5);
    const ModelSetup s = build_validated_setup(c);
    CHECK(s.reaction.semi_monotone_constant() == 1.0);
    CHECK(s.tau() == Approx(0.05));
}

TEST_CASE("assumption failures name the assumption") {
    const std::string text = "[time]\nn = 10\n";
    try {
        (void)build_validated_setup(parse_config_text(text));
        FAIL("expected an assumption error");
    } catch (const AssumptionError& e) {
        CHECK(e.assumption() == "A5");
        CHECK(std::string(e.what()).find("(A5)") != std::string::npos);
    }
    CHECK(error_text("[physics]\nnu = 0.0\n").find("(A1)") != std::string::npos);
}

TEST_CASE("syntax and schema errors carry a location") {
    CHECK(error_text("[grid]\nL = 1.0\nJ 200\n").rfind("run.toml:3:", 0) == 0);
    CHECK(error_text("[grid]\nwidth = 3\n").rfind("run.toml:2:", 0) == 0);
    CHECK(error_text("[grid]\nwidth = 3\n").find("width") != std::string::npos);
    CHECK(error_text("[time]\n\nn = \"twenty\"\n").rfind("run.toml:3:", 0) == 0);
    CHECK(error_text("[nowhere]\n").rfind("run.toml:1:", 0) == 0);
    CHECK(error_text("[grid]\nJ = 10\nJ = 20\n").rfind("run.toml:3:", 0) == 0);
    CHECK(error_text("[regularization]\nf_kind = \"huber\"\n").rfind("run.toml:2:", 0) == 0);
}

TEST_CASE("config text and json round trip") {
    RunConfig c = parse_config_text(minimal);
    c.epsilon = 0.1;
    c.flux_kind = FluxKind::arctan;
    c.rhos = {0.1, 0.05};
    c.seed = 42;
    c.target = FieldSpec{FieldSpec::Kind::tanh, 0.3, -0.2, true};
    const RunConfig back = parse_config_text(c.to_text());
    CHECK(back.to_text() == c.to_text());
    CHECK(parse_config_json(c.to_json()).to_text() == c.to_text());
}

TEST_CASE("field specs") {
    const FieldSpec f = parse_field_spec("clamp(sine(1.5, 2))");
    CHECK(f.kind == FieldSpec::Kind::sine);
    CHECK(f.clamped);
    CHECK(parse_field_spec(f.to_string()).to_string() == f.to_string());
    const Field v = f.evaluate(build_grid(1.0, 40));
    for (double x : v) CHECK(std::abs(x) <= 1.0);
    CHECK(*std::max_element(v.begin(), v.end()) == 1.0);
    CHECK(parse_field_spec("constant(-0.5)").evaluate(build_grid(1.0, 4))[2] == -0.5);
    CHECK_THROWS_AS(parse_field_spec("gauss(1)"), ConfigError);
}

TEST_CASE("number formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0}) {
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_float(2.0) == "2.0");
}

TEST_CASE("csv schemas") {
    const ModelSetup s = testing::small_setup(10, 20);
    const Trajectory u = testing::constant_trajectory(s, 0.5);
    const StateTrajectory t = solve_state(s, u);
    const std::string traj = trajectory_csv(s, t.w, u);
    CHECK(first_line(traj) == "i,j,x,w,u,xi,flux,dwdx");
    CHECK(line_count(traj) == 1 + (s.steps + 1) * s.grid.node_count());

    const std::string ledger = ledger_csv(energy_ledger_check(s, t.w, u));
    CHECK(first_line(ledger) == "i,kinetic,free_energy,rhs,slack");
    CHECK(line_count(ledger) == 1 + s.steps);

    const OptimizeResult r = optimize(s, zero_controls(s));
    CHECK(first_line(history_csv(r.history)) == "k,J,grad_norm,step,evals");
}

TEST_CASE("check registry") {
    CHECK(check_count() == 11);
    CHECK(check_name(9) == "discrete_gronwall");
    CHECK_THROWS_AS(run_check(RunConfig{}, 0), ConfigError);
    CHECK_THROWS_AS(run_check(RunConfig{}, 12), ConfigError);
    const CheckResult r = run_check(RunConfig{}, 9);
    CHECK(r.passed);
    CHECK(r.to_json().at("name") == "discrete_gronwall");
}
