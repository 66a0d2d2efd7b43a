#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "ac_control/errors.hpp"
#include "ac_control/physics.hpp"

using namespace ac;
using doctest::Approx;

namespace {

constexpr std::array<FluxKind, 3> smooth_kinds{FluxKind::hyperbola, FluxKind::tanh_log, FluxKind::arctan};
constexpr std::array<double, 4> levels{1.0, 0.5, 0.1, 0.01};

}  // namespace

TEST_CASE("flux oracles") {
    // eps = 3 lies outside the admissible range; the hyperbola scales as f_eps(r) = eps f_1(r / eps)
    CHECK(3.0 * FluxRegularization(FluxKind::hyperbola, 1.0).value(4.0 / 3.0) == Approx(2.0));
    CHECK(FluxRegularization(FluxKind::hyperbola, 0.75).value(1.0) == Approx(0.5));
    for (FluxKind k : smooth_kinds) {
        for (double eps : levels) CHECK(FluxRegularization(k, eps).value(0.0) == 0.0);
    }
    const FluxRegularization h1(FluxKind::hyperbola, 1.0);
    CHECK(h1.derivative(0.0) == 0.0);
    CHECK(h1.second_derivative(0.0) == Approx(1.0));

    const FluxRegularization abs(FluxKind::abs, 0.0);
    CHECK(abs.value(-2.0) == 2.0);
    CHECK(abs.derivative(-2.0) == -1.0);
    CHECK_THROWS_AS(abs.derivative(0.0), NondifferentiableError);
}

TEST_CASE("flux parameters are validated") {
    CHECK_THROWS_AS(FluxRegularization(FluxKind::hyperbola, 0.0), ConfigError);
    CHECK_THROWS_AS(FluxRegularization(FluxKind::hyperbola, 1.5), ConfigError);
    CHECK_THROWS_AS(FluxRegularization(FluxKind::abs, 0.1), ConfigError);
    CHECK(parse_flux_kind("tanh_log") == FluxKind::tanh_log);
    CHECK_THROWS_AS(parse_flux_kind("huber"), ConfigError);
}

TEST_CASE("flux properties hold for every smooth kind and level") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dist(-6.0, 6.0);
    for (FluxKind k : smooth_kinds) {
        for (double eps : levels) {
            CAPTURE(to_string(k));
            CAPTURE(eps);
            const FluxRegularization f(k, eps);
            for (int s = 0; s < 500; ++s) {
                const double r = dist(rng);
                // convex, even, below |r|, slope bounded by the growth constant
                CHECK(f.value(r) >= 0.0);
                CHECK(f.value(r) <= std::abs(r) + 1e-15);
                CHECK(f.value(-r) == Approx(f.value(r)).epsilon(1e-14));
                CHECK(std::abs(f.derivative(r)) <= f.growth_constant());
                CHECK(f.second_derivative(r) >= 0.0);
                // derivative consistent with central differences of the value
                const double step = 1e-6 * std::max(1.0, std::abs(r));
                const double fd = (f.value(r + step) - f.value(r - step)) / (2.0 * step);
                CHECK(std::abs(fd - f.derivative(r)) <= 1e-6);
                const double fd2 = (f.derivative(r + step) - f.derivative(r - step)) / (2.0 * step);
                CHECK(std::abs(fd2 - f.second_derivative(r)) <= 1e-4 * (1.0 + f.second_derivative(r)));
            }
        }
    }
}

TEST_CASE("flux converges pointwise to the absolute value as eps halves") {
    for (FluxKind k : smooth_kinds) {
        for (double r = -5.0; r <= 5.0; r += 0.25) {
            double previous = INFINITY;
            for (double eps = 1.0; eps > 1e-3; eps *= 0.5) {
                const double gap = std::abs(FluxRegularization(k, eps).value(r) - std::abs(r));
                CHECK(gap <= previous + 1e-15);
                previous = gap;
            }
            CHECK(previous <= 2e-2);
        }
    }
}

TEST_CASE("constraint oracles") {
    const ConstraintRegularization c1(ConstraintKind::c1_piecewise, 0.5);
    CHECK(c1.value(0.7) == 0.0);
    CHECK(c1.value(1.5) == Approx(0.5));
    // both branches agree at the switch point |r| = 1 + delta
    CHECK(c1.value(1.5 - 1e-12) == Approx(c1.value(1.5 + 1e-12)).epsilon(1e-9));
    CHECK(ConstraintRegularization(ConstraintKind::yosida, 0.25).value(1.5) == Approx(2.0));

    const ConstraintRegularization hard(ConstraintKind::hard, 0.0);
    CHECK_THROWS_AS(hard.value(0.5), ConstraintKindError);
    CHECK(hard.potential(0.5) == 0.0);
    CHECK(std::isinf(hard.potential(1.5)));
}

TEST_CASE("constraint properties") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> dist(-4.0, 4.0);
    for (ConstraintKind k : {ConstraintKind::c1_piecewise, ConstraintKind::yosida}) {
        for (double delta : levels) {
            const ConstraintRegularization c(k, delta);
            CHECK(c.slope_bound() == Approx(1.0 / delta));
            for (int s = 0; s < 500; ++s) {
                const double r = dist(rng);
                CHECK(c.value(-r) == -c.value(r));
                CHECK(c.derivative(r) >= 0.0);
                CHECK(c.derivative(r) <= c.slope_bound() * (1.0 + 1e-12));
                CHECK(c.potential(r) >= 0.0);
                if (std::abs(r) <= 1.0) {
                    CHECK(c.value(r) == 0.0);
                    CHECK(c.potential(r) == 0.0);
                }
                // potential is a primitive of K, away from kinks of K
                const double step = 1e-6;
                if (std::abs(std::abs(r) - 1.0) > 1e-4 && std::abs(std::abs(r) - 1.0 - delta) > 1e-4) {
                    const double fd = (c.potential(r + step) - c.potential(r - step)) / (2.0 * step);
                    CHECK(std::abs(fd - c.value(r)) <= 1e-5 * (1.0 + std::abs(c.value(r))));
                }
            }
        }
    }
}

TEST_CASE("reaction oracles") {
    const Reaction dw = Reaction::double_well();
    CHECK(dw.value(1.0) == 0.0);
    CHECK(dw.value(0.0) == 0.0);
    CHECK(dw.derivative(0.0) == -1.0);
    CHECK(dw.semi_monotone_constant() == 1.0);
    CHECK(dw.potential(1.0) == Approx(0.0));
    CHECK(dw.potential(-1.0) == Approx(0.0));
    CHECK(dw.potential(0.0) == Approx(0.25));

    const Reaction zero(0.0, 0.0, 0.0);
    CHECK(zero.semi_monotone_constant() == 0.0);
    for (double r : {-2.0, 0.0, 3.0}) CHECK(zero.potential(r) == 0.0);

    CHECK_THROWS_AS(Reaction(-1.0, 0.0, 0.0), ConfigError);
}

TEST_CASE("reaction is semi-monotone with nonnegative primitive") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> arg(-3.0, 3.0);
    for (int t = 0; t < 50; ++t) {
        const Reaction g(std::abs(coef(rng)) + 0.1, coef(rng), coef(rng));
        for (int s = 0; s < 50; ++s) {
            const double r = arg(rng);
            CHECK(g.derivative(r) >= -g.semi_monotone_constant());
            CHECK(g.potential(r) >= -1e-12);
            const double step = 1e-6;
            CHECK((g.potential(r + step) - g.potential(r - step)) / (2 * step) ==
                  Approx(g.value(r)).epsilon(1e-6).scale(1.0));
        }
    }
}

TEST_CASE("resolvent oracles and nonexpansiveness") {
    CHECK(resolvent(FluxRegularization(FluxKind::abs, 0.0), 1.0, 3.0) == Approx(2.0));
    CHECK(resolvent(FluxRegularization(FluxKind::abs, 0.0), 1.0, 0.5) == 0.0);

    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> dist(-10.0, 10.0);
    for (FluxKind k : {FluxKind::abs, FluxKind::hyperbola, FluxKind::tanh_log, FluxKind::arctan}) {
        const FluxRegularization f(k, k == FluxKind::abs ? 0.0 : 0.1);
        for (double nu : {0.5, 1.0}) {
            CHECK(resolvent(f, nu, 0.0) == 0.0);
            for (int s = 0; s < 300; ++s) {
                double z1 = dist(rng);
                double z2 = dist(rng);
                if (z1 > z2) std::swap(z1, z2);
                const double y1 = resolvent(f, nu, z1);
                const double y2 = resolvent(f, nu, z2);
                CHECK(y1 <= y2);
                CHECK(std::abs(y1 - y2) <= std::abs(z1 - z2) / (nu * nu) + 1e-12);
            }
        }
    }
}
