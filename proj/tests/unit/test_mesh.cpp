#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "ac_control/errors.hpp"
#include "ac_control/mesh.hpp"
#include "support.hpp"

using namespace ac;
using doctest::Approx;

TEST_CASE("grid nodes and lumped mass on four cells") {
    const Grid g = build_grid(1.0, 4);
    const std::vector<double> nodes{-1.0, -0.5, 0.0, 0.5, 1.0};
    const std::vector<double> mass{0.25, 0.5, 0.5, 0.5, 0.25};
    CHECK(g.spacing() == 0.5);
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(g.node(j) == nodes[j]);
        CHECK(g.mass(j) == mass[j]);
    }
    CHECK(std::accumulate(g.mass().begin(), g.mass().end(), 0.0) == 2.0);
}

TEST_CASE("grid rejects degenerate input") {
    CHECK_THROWS_AS(build_grid(1.0, 1), ConfigError);
    CHECK_THROWS_AS(build_grid(0.0, 4), ConfigError);
    CHECK_THROWS_AS(build_grid(-1.0, 4), ConfigError);
}

TEST_CASE("inner product oracles") {
    const Grid g = build_grid(1.0, 4);
    const Field one = constant_field(g, 1.0);
    const Field zero = constant_field(g, 0.0);
    Field x(g.node_count());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = g.node(j);
    CHECK(inner_product(g, one, one) == Approx(2.0));
    CHECK(std::abs(inner_product(g, x, one)) < 1e-15);
    CHECK(inner_product(g, one, zero) == 0.0);
}

TEST_CASE("forward differences") {
    const Grid g = build_grid(1.0, 8);
    const EdgeField dc = forward_diff(g, constant_field(g, 3.7));
    for (double v : dc) CHECK(v == 0.0);

    Field x(g.node_count());
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = g.node(j);
    for (double v : forward_diff(g, x)) CHECK(v == Approx(1.0).epsilon(1e-14));

    const Grid unit = build_grid(1.0, 2);  // h = 1
    const EdgeField d = forward_diff(unit, Field{0.0, 1.0, 0.0});
    CHECK(d[0] == 1.0);
    CHECK(d[1] == -1.0);
}

TEST_CASE("neumann divergence") {
    const Grid g = build_grid(1.0, 4);
    const Field zero = neumann_divergence(g, EdgeField(4, 0.0));
    for (double v : zero) CHECK(v == 0.0);

    // zero ghost fluxes: boundary cells see the full jump over half a cell
    const Field one = neumann_divergence(g, EdgeField(4, 1.0));
    const std::vector<double> expected{4.0, 0.0, 0.0, 0.0, -4.0};
    for (std::size_t j = 0; j < 5; ++j) CHECK(one[j] == Approx(expected[j]));
}

TEST_CASE("summation by parts on random data") {
    const Grid g = build_grid(1.0, 7);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Field phi = testing::random_field(g.node_count(), seed);
        const Field qn = testing::random_field(g.cells(), seed + 1000);
        const EdgeField q(std::vector<double>(qn.begin(), qn.end()));
        const EdgeField dphi = forward_diff(g, phi);
        double edge_sum = 0.0;
        for (std::size_t e = 0; e < q.size(); ++e) edge_sum += g.spacing() * q[e] * dphi[e];
        const double node_sum = inner_product(g, neumann_divergence(g, q), phi);
        CHECK(std::abs(node_sum + edge_sum) <= 1e-13 * (1.0 + std::abs(edge_sum)));
    }
}

TEST_CASE("tridiagonal solves") {
    SUBCASE("identity") {
        TridiagonalSystem t(4);
        t.diag.assign(4, 1.0);
        const Field r{1.0, -2.0, 3.0, 0.5};
        const Field x = solve_tridiagonal(t, r);
        for (std::size_t j = 0; j < 4; ++j) CHECK(x[j] == r[j]);
    }
    SUBCASE("two by two") {
        TridiagonalSystem t(2);
        t.diag = {2.0, 2.0};
        t.lower = {1.0};
        t.upper = {1.0};
        const Field x = solve_tridiagonal(t, Field{3.0, 3.0});
        CHECK(x[0] == Approx(1.0));
        CHECK(x[1] == Approx(1.0));
    }
    SUBCASE("zero diagonal is singular") {
        TridiagonalSystem t(3);
        CHECK_THROWS_AS(solve_tridiagonal(t, Field(3, 1.0)), SingularSystemError);
    }
    SUBCASE("random diagonally dominant systems have small residuals") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const std::size_t n = 30;
            const Field off = testing::random_field(n, seed);
            TridiagonalSystem t(n);
            for (std::size_t j = 0; j + 1 < n; ++j) t.lower[j] = t.upper[j] = off[j];
            for (std::size_t j = 0; j < n; ++j) t.diag[j] = 2.5 + std::abs(off[j]);
            const Field b = testing::random_field(n, seed + 7);
            const Field r = t.apply(solve_tridiagonal(t, b));
            double worst = 0.0;
            for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(r[j] - b[j]));
            CHECK(worst <= 1e-13);
        }
    }
}

TEST_CASE("stiffness assembly is symmetric with zero row sums") {
    const Grid g = build_grid(2.0, 9);
    const Field c = testing::random_field(g.cells(), 3, 1.0);
    EdgeField coeff(g.cells());
    for (std::size_t e = 0; e < coeff.size(); ++e) coeff[e] = 1.5 + c[e];
    const TridiagonalSystem s = assemble_stiffness(g, coeff);
    CHECK(s.symmetric());
    const Field ones = s.apply(constant_field(g, 1.0));
    for (double v : ones) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("discrete gronwall bound") {
    CHECK(gronwall_bound(1.0, 0.0, std::vector<double>{0.0}, 0.1, 1.0) == Approx(2.0));
    CHECK(gronwall_bound(0.0, 0.0, std::vector<double>{0.0, 0.0}, 0.1, 1.0) == 0.0);
    CHECK(gronwall_bound(0.0, 0.0, std::vector<double>{1.0, 1.0}, 0.5, 0.5) == Approx(4.0));
    CHECK_THROWS_AS(gronwall_bound(1.0, 0.0, std::vector<double>{0.0}, 0.5, 1.0), PreconditionError);
}

TEST_CASE("gronwall recursion property on random sequences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 12;
        const double tau = 0.01 + 0.1 * unit(rng);
        const double c = 0.45 * unit(rng) / tau;
        std::vector<double> a(n + 1), b(n + 1), cs(n);
        a[0] = unit(rng);
        b[0] = unit(rng);
        for (std::size_t i = 1; i <= n; ++i) {
            cs[i - 1] = unit(rng);
            b[i] = unit(rng) * (a[i - 1] / tau + cs[i - 1]);
            // largest A_i allowed by the recursion, scaled back by a random factor
            const double top = (a[i - 1] - tau * b[i] + tau * cs[i - 1]) / (1.0 - c * tau);
            a[i] = std::max(0.0, top * unit(rng));
        }
        CHECK(gronwall_recursion_holds(a, b, cs, tau, c, 1e-12));
        CHECK(gronwall_bound_holds(a, b, cs, tau, c));
    }
}

TEST_CASE("riesz representative and norms") {
    const Grid g = build_grid(1.0, 16);
    const Field one = constant_field(g, 1.0);
    const Field r = riesz_representative(g, mass_dual(g, one));
    for (double v : r) CHECK(v == Approx(1.0).epsilon(1e-12));
    for (double v : riesz_representative(g, DualField(g.node_count(), 0.0))) CHECK(v == 0.0);

    // the representative reproduces the functional in the Y inner product
    const Field a = testing::random_field(g.node_count(), 5);
    const Field phi = testing::random_field(g.node_count(), 6);
    const DualField z = mass_dual(g, a);
    CHECK(inner_product_y(g, riesz_representative(g, z), phi) == Approx(dual_pairing(z, phi)).epsilon(1e-12));

    const FieldNorms n1 = field_norms(g, one);
    CHECK(n1.l2 == Approx(std::sqrt(2.0)));
    CHECK(n1.h1 == Approx(std::sqrt(2.0)));
    CHECK(n1.c0 == 1.0);
    const FieldNorms n0 = field_norms(g, constant_field(g, 0.0));
    CHECK(n0.l2 == 0.0);
    CHECK(n0.h1 == 0.0);
    CHECK(n0.c0 == 0.0);
    CHECK(n0.c1 == 0.0);
}

TEST_CASE("field length mismatches are rejected") {
    const Grid g = build_grid(1.0, 4);
    CHECK_THROWS_AS(inner_product(g, Field(5, 1.0), Field(4, 1.0)), GridMismatchError);
    CHECK_THROWS_AS(forward_diff(g, Field(3, 1.0)), GridMismatchError);
}
