#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "ac_control/control.hpp"
#include "ac_control/errors.hpp"
#include "support.hpp"

using namespace ac;
using doctest::Approx;

namespace {

Trajectory scaled(const Trajectory& t, double s) {
    Trajectory out = t;
    for (Field& f : out) {
        for (double& v : f) v *= s;
    }
    return out;
}

ModelSetup with_weights(double control_weight, double tracking_weight) {
    RunConfig c = testing::small_config();
    c.physics.control_weight = control_weight;
    c.physics.tracking_weight = tracking_weight;
    return build_validated_setup(c);
}

}  // namespace

TEST_CASE("cost vanishes when the target is reached without control") {
    RunConfig c = testing::small_config();
    c.initial = FieldSpec{FieldSpec::Kind::constant, 1.0, 0.0, false};
    c.target = FieldSpec{FieldSpec::Kind::constant, 1.0, 0.0, false};
    const ModelSetup s = build_validated_setup(c);
    const Trajectory u = zero_controls(s);
    CHECK(cost(s, solve_state(s, u), u) == Approx(0.0).scale(1.0));
}

TEST_CASE("cost is the quadrature of the tracking error plus the control penalty") {
    const ModelSetup s = testing::small_setup();
    const Trajectory u = testing::constant_trajectory(s, 0.4);
    const StateTrajectory t = solve_state(s, u);
    double tracking = 0.0;
    double control = 0.0;
    for (std::size_t i = 1; i <= s.steps; ++i) {
        for (std::size_t j = 0; j < s.grid.node_count(); ++j) {
            const double e = t.w[i][j] - s.target[i - 1][j];
            tracking += s.grid.mass(j) * e * e;
            control += s.grid.mass(j) * u[i - 1][j] * u[i - 1][j];
        }
    }
    const double expected = 0.5 * s.physics.tracking_weight * tracking + 0.5 * s.physics.control_weight * control;
    CHECK(cost(s, t, u) == Approx(expected).epsilon(1e-13));

    const ModelSetup free = with_weights(1.0, 0.0);
    CHECK(cost(free, solve_state(free, u), u) == Approx(0.5 * control).epsilon(1e-13));
}

TEST_CASE("gradient in the degenerate weight cases") {
    const Trajectory base = random_direction(with_weights(1.0, 0.0), 4);
    SUBCASE("no tracking: gradient is the control itself") {
        const ModelSetup s = with_weights(2.0, 0.0);
        const GradientResult g = gradient(s, base);
        for (std::size_t i = 0; i < s.steps; ++i) {
            for (std::size_t j = 0; j < s.grid.node_count(); ++j) {
                CHECK(g.gradient[i][j] == Approx(2.0 * base[i][j]).epsilon(1e-14));
            }
        }
    }
    SUBCASE("no control weight: gradient vanishes") {
        const ModelSetup s = with_weights(0.0, 1.0);
        const GradientResult g = gradient(s, base);
        CHECK(norm_x(s.grid, g.gradient) == 0.0);
    }
}

TEST_CASE("taylor remainder is second order") {
    const ModelSetup s = testing::small_setup();
    const Trajectory u = testing::constant_trajectory(s, 0.2);
    const GradientResult g = gradient(s, u);
    const Trajectory h = random_direction(s, 9);
    const double slope = inner_product(s.grid, g.gradient, h);
    StepOptions tight;
    tight.newton_tol = 1e-13;
    auto remainder = [&](double lambda) {
        Trajectory moved = u;
        for (std::size_t i = 0; i < u.size(); ++i) {
            Field d = h[i];
            for (double& v : d) v *= lambda;
            moved[i] += d;
        }
        return std::abs(cost(s, solve_state(s, moved, tight), moved) - g.cost - lambda * slope);
    };
    CHECK(remainder(1e-3) / remainder(5e-4) == Approx(4.0).epsilon(0.1));
}

TEST_CASE("finite difference check on the default problem") {
    const ModelSetup s = testing::small_setup();
    const FdReport r = fd_gradient_check(s, zero_controls(s), 5, 1e-5, {1e-3, 5e-4, 2.5e-4}, 1);
    CHECK(r.directions.size() == 5);
    CHECK(r.max_relative_error <= 1e-5);
    REQUIRE(r.taylor.size() == 3);
    CHECK(r.taylor[0].ratio == 0.0);
    for (std::size_t k = 1; k < r.taylor.size(); ++k) CHECK(r.taylor[k].ratio == Approx(4.0).epsilon(0.125));
}

TEST_CASE("probe results do not depend on the thread count") {
    const ModelSetup s = testing::small_setup(20, 20);
    const FdReport one = fd_gradient_check(s, zero_controls(s), 4, 1e-5, {1e-3}, 3, {}, 1);
    const FdReport many = fd_gradient_check(s, zero_controls(s), 4, 1e-5, {1e-3}, 3, {}, 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(one.directions[k].fd_slope == many.directions[k].fd_slope);
}

TEST_CASE("slope along the normalized gradient is the gradient norm") {
    const ModelSetup s = testing::small_setup();
    const GradientResult g = gradient(s, zero_controls(s));
    const double n = norm_x(s.grid, g.gradient);
    REQUIRE(n > 0.0);
    CHECK(inner_product(s.grid, g.gradient, scaled(g.gradient, 1.0 / n)) == Approx(n).epsilon(1e-13));
}

TEST_CASE("random directions are unit and reproducible") {
    const ModelSetup s = testing::small_setup();
    const Trajectory a = random_direction(s, 17);
    const Trajectory b = random_direction(s, 17);
    const Trajectory c = random_direction(s, 18);
    CHECK(norm_x(s.grid, a) == Approx(1.0).epsilon(1e-14));
    CHECK(a[3][5] == b[3][5]);
    CHECK(a[3][5] != c[3][5]);
}

TEST_CASE("optimizer returns at once from a stationary start") {
    const ModelSetup s = with_weights(1.0, 0.0);
    const OptimizeResult r = optimize(s, zero_controls(s));
    CHECK(r.iterations == 0);
    CHECK(r.status == OptimizeStatus::converged);
}

TEST_CASE("optimizer reaches stationarity with monotone cost") {
    const ModelSetup s = testing::small_setup();
    for (StepRule rule : {StepRule::barzilai_borwein_safeguarded, StepRule::armijo_backtracking}) {
        CAPTURE(to_string(rule));
        OptimizeOptions opts;
        opts.step_rule = rule;
        const OptimizeResult r = optimize(s, zero_controls(s), opts);
        CHECK(r.status == OptimizeStatus::converged);
        CHECK(r.iterations <= 500);
        CHECK(r.stationarity <= 1e-6);
        REQUIRE(r.history.size() >= 6);
        for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k].cost <= r.history[k - 1].cost);
        for (std::size_t k = 1; k <= 5; ++k) CHECK(r.history[k].cost < r.history[k - 1].cost);

        // fixed point: the returned control satisfies the first-order condition
        const GradientResult g = gradient(s, r.control);
        CHECK(norm_x(s.grid, g.gradient) <= 1e-6);
    }
}

TEST_CASE("options and names") {
    CHECK(parse_step_rule(to_string(StepRule::armijo_backtracking)) == StepRule::armijo_backtracking);
    CHECK_THROWS_AS(parse_step_rule("newton"), ConfigError);
    OptimizeOptions bad;
    bad.tolerance = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("thread cap comes from the environment") {
    ::setenv("AC_CONTROL_THREADS", "3", 1);
    CHECK(probe_threads() == 3);
    CHECK(probe_threads(2) == 2);
    ::unsetenv("AC_CONTROL_THREADS");
    CHECK(probe_threads() >= 1);
}
