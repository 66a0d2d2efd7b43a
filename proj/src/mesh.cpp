#include "ac_control/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ac {

Grid::Grid(double half_length, std::size_t cells) : half_length_(half_length), cells_(cells) {
    if (!(half_length > 0.0) || !std::isfinite(half_length)) {
        throw ConfigError("grid half-length L must be positive and finite, got " + std::to_string(half_length));
    }
    if (cells < 2) {
        throw ConfigError("grid needs at least J = 2 cells, got " + std::to_string(cells));
    }
    spacing_ = 2.0 * half_length / static_cast<double>(cells);
    nodes_.resize(cells + 1);
    mass_.assign(cells + 1, spacing_);
    for (std::size_t j = 0; j <= cells; ++j) {
        nodes_[j] = -half_length + static_cast<double>(j) * spacing_;
    }
    nodes_.back() = half_length;
    mass_.front() = 0.5 * spacing_;
    mass_.back() = 0.5 * spacing_;
}

Grid build_grid(double half_length, long cells) {
    if (cells < 2) throw ConfigError("grid needs at least J = 2 cells, got " + std::to_string(cells));
    return Grid(half_length, static_cast<std::size_t>(cells));
}

Field TridiagonalSystem::apply(const Field& x) const {
    const std::size_t n = size();
    if (x.size() != n) throw GridMismatchError("tridiagonal apply: length mismatch");
    Field y(n);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = diag[j] * x[j];
        if (j > 0) acc += lower[j - 1] * x[j - 1];
        if (j + 1 < n) acc += upper[j] * x[j + 1];
        y[j] = acc;
    }
    return y;
}

namespace {

void require_nodes(const Grid& grid, std::size_t n, const char* what) {
    if (n != grid.node_count()) {
        throw GridMismatchError(std::string(what) + ": expected " + std::to_string(grid.node_count()) +
                                " nodal values, got " + std::to_string(n));
    }
}

void require_edges(const Grid& grid, std::size_t n, const char* what) {
    if (n != grid.cells()) {
        throw GridMismatchError(std::string(what) + ": expected " + std::to_string(grid.cells()) +
                                " edge values, got " + std::to_string(n));
    }
}

}  // namespace

Field constant_field(const Grid& grid, double value) { return Field(grid.node_count(), value); }

double inner_product(const Grid& grid, const Field& a, const Field& b) {
    require_nodes(grid, a.size(), "inner_product");
    require_nodes(grid, b.size(), "inner_product");
    const auto m = grid.mass();
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += m[j] * a[j] * b[j];
    return acc;
}

double norm_x(const Grid& grid, const Field& a) { return std::sqrt(inner_product(grid, a, a)); }

double inner_product(const Grid& grid, const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size()) throw GridMismatchError("trajectory inner product: step count mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += inner_product(grid, a[i], b[i]);
    return acc;
}

double norm_x(const Grid& grid, const Trajectory& a) { return std::sqrt(inner_product(grid, a, a)); }

EdgeField forward_diff(const Grid& grid, const Field& a) {
    require_nodes(grid, a.size(), "forward_diff");
    const double inv_h = 1.0 / grid.spacing();
    EdgeField s(grid.cells());
    for (std::size_t e = 0; e < s.size(); ++e) s[e] = (a[e + 1] - a[e]) * inv_h;
    return s;
}

Field neumann_divergence(const Grid& grid, const EdgeField& q) {
    require_edges(grid, q.size(), "neumann_divergence");
    const auto m = grid.mass();
    const std::size_t n = grid.node_count();
    Field d(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double right = j < q.size() ? q[j] : 0.0;
        const double left = j > 0 ? q[j - 1] : 0.0;
        d[j] = (right - left) / m[j];
    }
    return d;
}

Field edge_to_node(const Grid& grid, const EdgeField& q) {
    require_edges(grid, q.size(), "edge_to_node");
    const std::size_t n = grid.node_count();
    Field out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double right = j < q.size() ? q[j] : 0.0;
        const double left = j > 0 ? q[j - 1] : 0.0;
        out[j] = 0.5 * (left + right);
    }
    return out;
}

TridiagonalSystem assemble_stiffness(const Grid& grid, const EdgeField& coefficients) {
    require_edges(grid, coefficients.size(), "assemble_stiffness");
    const double inv_h = 1.0 / grid.spacing();
    TridiagonalSystem s(grid.node_count());
    for (std::size_t e = 0; e < coefficients.size(); ++e) {
        const double k = coefficients[e] * inv_h;
        s.diag[e] += k;
        s.diag[e + 1] += k;
        s.lower[e] = -k;
        s.upper[e] = -k;
    }
    return s;
}

Field solve_tridiagonal(const TridiagonalSystem& system, const Field& rhs) {
    const std::size_t n = system.size();
    if (rhs.size() != n) throw GridMismatchError("solve_tridiagonal: rhs length mismatch");
    if (n == 0) return Field{};
    constexpr double kPivotFloor = 1e-14;

    std::vector<double> c(n);
    Field x(n);
    double pivot = system.diag[0];
    if (std::abs(pivot) < kPivotFloor) throw SingularSystemError("solve_tridiagonal: zero pivot at row 0");
    c[0] = n > 1 ? system.upper[0] / pivot : 0.0;
    x[0] = rhs[0] / pivot;
    for (std::size_t j = 1; j < n; ++j) {
        pivot = system.diag[j] - system.lower[j - 1] * c[j - 1];
        if (std::abs(pivot) < kPivotFloor || !std::isfinite(pivot)) {
            throw SingularSystemError("solve_tridiagonal: pivot below 1e-14 at row " + std::to_string(j));
        }
        c[j] = j + 1 < n ? system.upper[j] / pivot : 0.0;
        x[j] = (rhs[j] - system.lower[j - 1] * x[j - 1]) / pivot;
    }
    for (std::size_t j = n - 1; j-- > 0;) x[j] -= c[j] * x[j + 1];
    return x;
}

double gronwall_bound(double a0, double b0, std::span<const double> c_seq, double tau, double c) {
    if (a0 < 0.0 || b0 < 0.0 || tau < 0.0 || c < 0.0) {
        throw PreconditionError("gronwall_bound: A0, B0, tau and c must be nonnegative");
    }
    if (!(c * tau < 0.5)) throw PreconditionError("gronwall_bound: requires c * tau < 1/2");
    double sum_c = 0.0;
    for (double v : c_seq) {
        if (v < 0.0) throw PreconditionError("gronwall_bound: C_j must be nonnegative");
        sum_c += v;
    }
    return std::ldexp(a0 + tau * b0 + tau * sum_c, static_cast<int>(c_seq.size()));
}

bool gronwall_recursion_holds(std::span<const double> a_seq, std::span<const double> b_seq,
                              std::span<const double> c_seq, double tau, double c, double slack) {
    const std::size_t n = c_seq.size();
    if (a_seq.size() != n + 1 || b_seq.size() != n + 1) {
        throw PreconditionError("gronwall: A and B need n+1 entries, C needs n");
    }
    for (std::size_t i = 1; i <= n; ++i) {
        const double lhs = (a_seq[i] - a_seq[i - 1] + tau * b_seq[i]) / tau;
        const double rhs = c * a_seq[i] + c_seq[i - 1];
        if (lhs > rhs + slack) return false;
    }
    return true;
}

bool gronwall_bound_holds(std::span<const double> a_seq, std::span<const double> b_seq,
                          std::span<const double> c_seq, double tau, double c) {
    const std::size_t n = c_seq.size();
    if (a_seq.size() != n + 1 || b_seq.size() != n + 1) {
        throw PreconditionError("gronwall: A and B need n+1 entries, C needs n");
    }
    const double bound = gronwall_bound(a_seq[0], b_seq[0], c_seq, tau, c);
    for (std::size_t i = 1; i <= n; ++i) {
        if (a_seq[i] + tau * b_seq[i] > bound) return false;
    }
    return true;
}

double dual_pairing(const DualField& z, const Field& phi) {
    if (z.size() != phi.size()) throw GridMismatchError("dual_pairing: length mismatch");
    double acc = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) acc += z[j] * phi[j];
    return acc;
}

DualField mass_dual(const Grid& grid, const Field& a) {
    require_nodes(grid, a.size(), "mass_dual");
    DualField z(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) z[j] = grid.mass(j) * a[j];
    return z;
}

Field riesz_representative(const Grid& grid, const DualField& z) {
    require_nodes(grid, z.size(), "riesz_representative");
    TridiagonalSystem system = assemble_stiffness(grid, EdgeField(grid.cells(), 1.0));
    for (std::size_t j = 0; j < system.size(); ++j) system.diag[j] += grid.mass(j);
    return solve_tridiagonal(system, Field(z.values()));
}

double inner_product_y(const Grid& grid, const Field& a, const Field& b) {
    const EdgeField da = forward_diff(grid, a);
    const EdgeField db = forward_diff(grid, b);
    double acc = 0.0;
    for (std::size_t e = 0; e < da.size(); ++e) acc += da[e] * db[e];
    return inner_product(grid, a, b) + grid.spacing() * acc;
}

FieldNorms field_norms(const Grid& grid, const Field& a) {
    FieldNorms out;
    const EdgeField da = forward_diff(grid, a);
    double grad_sq = 0.0;
    double grad_max = 0.0;
    for (double s : da) {
        grad_sq += s * s;
        grad_max = std::max(grad_max, std::abs(s));
    }
    const double l2_sq = inner_product(grid, a, a);
    out.l2 = std::sqrt(l2_sq);
    out.h1 = std::sqrt(l2_sq + grid.spacing() * grad_sq);
    for (double v : a) out.c0 = std::max(out.c0, std::abs(v));
    out.c1 = std::max(out.c0, grad_max);
    return out;
}

}  // namespace ac
