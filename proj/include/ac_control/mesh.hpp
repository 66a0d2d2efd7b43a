#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "ac_control/errors.hpp"

namespace ac {

/// Uniform mesh on [-L, L] with J cells, lumped (trapezoid) mass weights.
///
/// Immutable after construction; copy freely.
class Grid {
public:
    /// Throws ConfigError unless L > 0 and J >= 2.
    Grid(double half_length, std::size_t cells);

    double half_length() const noexcept { return half_length_; }
    std::size_t cells() const noexcept { return cells_; }
    std::size_t node_count() const noexcept { return cells_ + 1; }
    double spacing() const noexcept { return spacing_; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> mass() const noexcept { return mass_; }
    double node(std::size_t j) const { return nodes_[j]; }
    double mass(std::size_t j) const { return mass_[j]; }
    double edge_midpoint(std::size_t e) const { return nodes_[e] + 0.5 * spacing_; }

    friend bool operator==(const Grid& a, const Grid& b) noexcept {
        return a.half_length_ == b.half_length_ && a.cells_ == b.cells_;
    }

private:
    double half_length_;
    std::size_t cells_;
    double spacing_;
    std::vector<double> nodes_;
    std::vector<double> mass_;
};

Grid build_grid(double half_length, long cells);

/// Dense vector of grid values. The tag keeps nodal, edge and dual data apart.
template <class Tag>
class GridVector {
public:
    GridVector() = default;
    explicit GridVector(std::size_t n, double value = 0.0) : values_(n, value) {}
    explicit GridVector(std::vector<double> values) : values_(std::move(values)) {}
    GridVector(std::initializer_list<double> values) : values_(values) {}

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }
    auto begin() noexcept { return values_.begin(); }
    auto end() noexcept { return values_.end(); }
    auto begin() const noexcept { return values_.begin(); }
    auto end() const noexcept { return values_.end(); }

    std::span<const double> view() const noexcept { return values_; }
    std::span<double> view() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    GridVector& operator+=(const GridVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    GridVector& operator-=(const GridVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    GridVector& operator*=(double s) noexcept {
        for (double& v : values_) v *= s;
        return *this;
    }
    /// this += s * o
    GridVector& axpy(double s, const GridVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * o.values_[i];
        return *this;
    }

    friend GridVector operator+(GridVector a, const GridVector& b) { return a += b; }
    friend GridVector operator-(GridVector a, const GridVector& b) { return a -= b; }
    friend GridVector operator*(double s, GridVector a) { return a *= s; }
    friend bool operator==(const GridVector&, const GridVector&) = default;

private:
    void check_same(const GridVector& o) const {
        if (o.values_.size() != values_.size()) throw GridMismatchError("grid vector length mismatch");
    }

    std::vector<double> values_;
};

struct NodeTag {};
struct EdgeTag {};
struct DualTag {};

/// Nodal values, J+1 entries.
using Field = GridVector<NodeTag>;
/// Values at edge midpoints x_{j+1/2}, J entries.
using EdgeField = GridVector<EdgeTag>;
/// Pairing coefficients c of a functional: <z, phi> = sum_j c_j phi_j.
using DualField = GridVector<DualTag>;

/// Time-indexed fields. Controls and targets hold steps 1..n at [i-1];
/// state trajectories hold steps 0..n at [i].
using Trajectory = std::vector<Field>;

/// Symmetric-or-not tridiagonal matrix; bands have lengths N-1, N, N-1.
struct TridiagonalSystem {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit TridiagonalSystem(std::size_t n = 0) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0) {}
    std::size_t size() const noexcept { return diag.size(); }
    Field apply(const Field& x) const;
    bool symmetric() const noexcept { return lower == upper; }
};

struct FieldNorms {
    double l2 = 0.0;
    double h1 = 0.0;
    double c0 = 0.0;
    double c1 = 0.0;
};

Field constant_field(const Grid& grid, double value);

/// (a, b)_X = sum_j m_j a_j b_j.
double inner_product(const Grid& grid, const Field& a, const Field& b);
double norm_x(const Grid& grid, const Field& a);

/// Sum over steps of (a_i, b_i)_X.
double inner_product(const Grid& grid, const Trajectory& a, const Trajectory& b);
double norm_x(const Grid& grid, const Trajectory& a);

/// s_{j+1/2} = (a_{j+1} - a_j) / h.
EdgeField forward_diff(const Grid& grid, const Field& a);

/// d_j = (q_{j+1/2} - q_{j-1/2}) / m_j with zero ghost fluxes at both ends.
///
/// Exact summation by parts: (d, phi)_X = -h sum_e q_e (D phi)_e.
Field neumann_divergence(const Grid& grid, const EdgeField& q);

/// Arithmetic mean of the two adjacent edges; boundary nodes see a zero ghost edge.
Field edge_to_node(const Grid& grid, const EdgeField& q);

/// Matrix S with phi^T S psi = h sum_e c_e (D phi)_e (D psi)_e.
TridiagonalSystem assemble_stiffness(const Grid& grid, const EdgeField& coefficients);

/// Thomas elimination. Throws SingularSystemError when a pivot falls below 1e-14 in magnitude.
Field solve_tridiagonal(const TridiagonalSystem& system, const Field& rhs);

/// Right side 2^n (A0 + tau B0 + tau sum C_j) of the discrete Gronwall estimate, n = C.size().
///
/// Requires 0 <= c tau < 1/2 and nonnegative data; throws PreconditionError otherwise.
double gronwall_bound(double a0, double b0, std::span<const double> c_seq, double tau, double c);

/// True iff the sequences satisfy (A_i - A_{i-1} + tau B_i) / tau <= c A_i + C_i for i = 1..n
/// and every A_i + tau B_i stays below gronwall_bound(A_0, B_0, C, tau, c).
/// `a_seq` and `b_seq` have n+1 entries, `c_seq` has n.
bool gronwall_recursion_holds(std::span<const double> a_seq, std::span<const double> b_seq,
                              std::span<const double> c_seq, double tau, double c, double slack = 0.0);
bool gronwall_bound_holds(std::span<const double> a_seq, std::span<const double> b_seq,
                          std::span<const double> c_seq, double tau, double c);

/// <z, phi> = sum_j c_j phi_j.
double dual_pairing(const DualField& z, const Field& phi);

/// Lumped mass times a field, as pairing coefficients.
DualField mass_dual(const Grid& grid, const Field& a);

/// Solve (M + S_1) r = c so that <z, phi> = (r, phi)_Y for every phi.
Field riesz_representative(const Grid& grid, const DualField& z);

/// (a, b)_Y = (a, b)_X + h sum_e (Da)_e (Db)_e.
double inner_product_y(const Grid& grid, const Field& a, const Field& b);

FieldNorms field_norms(const Grid& grid, const Field& a);

}  // namespace ac
