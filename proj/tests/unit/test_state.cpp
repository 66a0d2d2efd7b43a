#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ac_control/errors.hpp"
#include "ac_control/state.hpp"
#include "support.hpp"

using namespace ac;
using doctest::Approx;

namespace {

ModelSetup constant_start(double value, long cells = 40, long steps = 20) {
    RunConfig c = testing::small_config(cells, steps);
    c.initial = FieldSpec{FieldSpec::Kind::constant, value, 0.0, false};
    return build_validated_setup(c);
}

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

}  // namespace

TEST_CASE("step energy at the origin is the reaction potential") {
    const ModelSetup s = testing::small_setup();
    const Field zero = constant_field(s.grid, 0.0);
    CHECK(step_energy(s, zero, zero, zero) == Approx(0.5));
}

TEST_CASE("constant steady states have zero residual and need no Newton step") {
    for (double c : {-1.0, 0.0, 1.0}) {
        const ModelSetup s = constant_start(c);
        const Field w = constant_field(s.grid, c);
        const Field u = constant_field(s.grid, 0.0);
        for (double r : step_residual(s, w, u, w)) CHECK(std::abs(r) < 1e-14);
        const StepResult res = solve_step(s, w, u);
        CHECK(res.diagnostics.iterations <= 1);
        CHECK(max_abs_diff(res.w, w) < 1e-13);
    }
}

TEST_CASE("linear reaction step has the scalar closed form") {
    RunConfig c = testing::small_config();
    c.a3 = 0.0;
    c.a1 = 1.0;
    c.a0 = 0.0;
    const ModelSetup s = build_validated_setup(c);
    const double w0 = 0.6;
    const StepResult res = solve_step(s, constant_field(s.grid, w0), constant_field(s.grid, 0.0));
    for (double v : res.w) CHECK(v == Approx(w0 / (1.0 + s.tau())).epsilon(1e-12));
}

TEST_CASE("residual is the mass-scaled gradient of the step energy") {
    const ModelSetup s = testing::small_setup(16, 20);
    const Field w_prev = s.initial;
    const Field u = testing::random_field(s.grid.node_count(), 1);
    const Field w = testing::random_field(s.grid.node_count(), 2, 1.2);
    const Field r = step_residual(s, w_prev, u, w);
    for (std::size_t j = 0; j < w.size(); ++j) {
        Field wp = w;
        Field wm = w;
        const double step = 1e-6;
        wp[j] += step;
        wm[j] -= step;
        const double fd = (step_energy(s, w_prev, u, wp) - step_energy(s, w_prev, u, wm)) / (2.0 * step);
        CHECK(fd / s.grid.mass(j) == Approx(r[j]).epsilon(1e-6).scale(1.0));
    }
}

TEST_CASE("step hessian is symmetric and matches differences of the residual") {
    const ModelSetup s = testing::small_setup(16, 20);
    const Field w = testing::random_field(s.grid.node_count(), 3, 1.1);
    const TridiagonalSystem hess = step_hessian(s, w);
    CHECK(hess.symmetric());
    const Field dir = testing::random_field(s.grid.node_count(), 4);
    const Field zero = constant_field(s.grid, 0.0);
    const double step = 1e-6;
    Field wp = w;
    Field wm = w;
    for (std::size_t j = 0; j < w.size(); ++j) {
        wp[j] += step * dir[j];
        wm[j] -= step * dir[j];
    }
    const Field rp = step_residual(s, zero, zero, wp);
    const Field rm = step_residual(s, zero, zero, wm);
    const Field hv = hess.apply(dir);
    for (std::size_t j = 0; j < w.size(); ++j) {
        CHECK(s.grid.mass(j) * (rp[j] - rm[j]) / (2.0 * step) == Approx(hv[j]).epsilon(1e-5).scale(1.0));
    }
}

TEST_CASE("newton residuals contract superlinearly on the default first step") {
    const ModelSetup s = testing::small_setup();
    const StepResult res = solve_step(s, s.initial, constant_field(s.grid, 0.0));
    const auto& h = res.diagnostics.residual_history;
    // contraction factors taken while the residual is still well above rounding level
    std::vector<double> ratios;
    for (std::size_t k = 1; k < h.size(); ++k) {
        if (h[k - 1] > 1e-6 * h.front()) ratios.push_back(h[k] / h[k - 1]);
    }
    REQUIRE(ratios.size() >= 3);
    const std::size_t n = ratios.size();
    CHECK(ratios[n - 1] < ratios[n - 2]);
    CHECK(ratios[n - 2] < ratios[n - 3]);
    CHECK(ratios[n - 1] < 1e-3);
    CHECK(h.back() <= 1e-10);
}

TEST_CASE("iteration cap raises nonconvergence with history") {
    const ModelSetup s = testing::small_setup();
    StepOptions opts;
    opts.max_newton = 1;
    opts.newton_tol = 1e-15;
    try {
        (void)solve_step(s, s.initial, constant_field(s.grid, 5.0), opts);
        FAIL("expected nonconvergence");
    } catch (const NonconvergenceError& e) {
        CHECK(e.last_iterate().size() == s.grid.node_count());
        CHECK(!e.residual_history().empty());
    }
}

TEST_CASE("well bottom is stationary") {
    const ModelSetup s = constant_start(1.0);
    const StateTrajectory t = solve_state(s, zero_controls(s));
    REQUIRE(t.w.size() == s.steps + 1);
    for (const Field& w : t.w) {
        for (double v : w) CHECK(v == Approx(1.0).epsilon(1e-13));
    }
    for (const LedgerEntry& e : energy_ledger_check(s, t.w, zero_controls(s))) {
        CHECK(e.rhs == 0.0);
        CHECK(std::abs(e.slack) < 1e-13);
        CHECK(e.passed);
    }
}

TEST_CASE("free energy decreases without forcing") {
    const ModelSetup s = testing::small_setup();
    const StateTrajectory t = solve_state(s, zero_controls(s));
    for (std::size_t i = 1; i < t.w.size(); ++i) {
        CHECK(free_energy(s, t.w[i]) <= free_energy(s, t.w[i - 1]) + 1e-12);
    }
    CHECK(ledger_passed(energy_ledger_check(s, t.w, zero_controls(s))));
}

TEST_CASE("free energy oracles") {
    const ModelSetup s = testing::small_setup(200, 20);
    CHECK(free_energy(s, constant_field(s.grid, 1.0)) == Approx(0.0).scale(1.0));
    CHECK(free_energy(s, constant_field(s.grid, 0.0)) == Approx(0.25 * 2.0));

    // near the nonsmooth limit the gradient part of a unit slope is |1| + nu^2 / 2 per unit length
    const ModelSetup sharp = s.with_regularization(1e-6, 0.25);
    Field x(s.grid.node_count());
    double reaction = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = s.grid.node(j);
        reaction += s.grid.mass(j) * s.reaction.potential(x[j]);
    }
    const double nu = s.physics.nu;
    CHECK(free_energy(sharp, x) - reaction == Approx(2.0 * (1.0 + 0.5 * nu * nu)).epsilon(1e-5));
}

TEST_CASE("energy ledger passes on the default run and catches a corrupted trajectory") {
    const ModelSetup s = testing::small_setup();
    const Trajectory u = testing::constant_trajectory(s, 0.5);
    StateTrajectory t = solve_state(s, u);
    CHECK(ledger_passed(energy_ledger_check(s, t.w, u)));

    Trajectory bad = t.w;
    bad[s.steps / 2] = testing::random_field(s.grid.node_count(), 99, 1.0);
    CHECK_FALSE(ledger_passed(energy_ledger_check(s, bad, u)));
}

TEST_CASE("constraint force bound") {
    SUBCASE("inside the box the force vanishes") {
        const ModelSetup s = testing::small_setup();
        const Trajectory u = zero_controls(s);
        const StateTrajectory t = solve_state(s, u);
        for (const XiBoundEntry& e : xi_bound_check(s, t, u)) {
            CHECK(e.max_xi == 0.0);
            CHECK(e.max_overshoot == 0.0);
            CHECK(e.slack_linear >= 0.0);
        }
    }
    SUBCASE("strong forcing pushes past the box and the estimate holds") {
        const ModelSetup s = testing::small_setup();
        const Trajectory u = testing::constant_trajectory(s, 3.0);
        const StateTrajectory t = solve_state(s, u);
        const auto report = xi_bound_check(s, t, u);
        CHECK(max_overshoot(t.w) > 0.0);
        const bool linear = std::all_of(report.begin(), report.end(), [](const auto& e) { return e.slack_linear >= 0.0; });
        const bool squared = std::all_of(report.begin(), report.end(), [](const auto& e) { return e.slack_squared >= 0.0; });
        CHECK((linear || squared));

        // halving delta shrinks the overshoot while the force stays of the same size
        const ModelSetup half = s.with_regularization(s.flux.epsilon(), s.constraint.delta() / 2.0);
        const StateTrajectory th = solve_state(half, u);
        const auto report_half = xi_bound_check(half, th, u);
        CHECK(max_overshoot(th.w) < max_overshoot(t.w));
        CHECK(report_half.back().max_xi == Approx(report.back().max_xi).epsilon(0.5));
    }
}
