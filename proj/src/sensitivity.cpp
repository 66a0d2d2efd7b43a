#include "ac_control/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ac {

namespace {

double max_abs(std::span<const double> v) {
    double out = 0.0;
    for (double x : v) out = std::max(out, std::abs(x));
    return out;
}

double relative_residual(const TridiagonalSystem& a, const Field& x, const Field& b) {
    const Field ax = a.apply(x);
    double r = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) r = std::max(r, std::abs(ax[j] - b[j]));
    const double scale = max_abs(b.view());
    return scale > 0.0 ? r / scale : r;
}

void require_steps(const ModelSetup& setup, const Trajectory& t, const char* what) {
    if (t.size() != setup.steps) {
        throw PreconditionError(std::string(what) + " needs n = " + std::to_string(setup.steps) + " fields");
    }
    for (const Field& f : t) {
        if (f.size() != setup.grid.node_count()) throw GridMismatchError(std::string(what) + ": wrong field length");
    }
}

Field mass_times(const Grid& grid, const Field& a, double scale) {
    Field out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = scale * grid.mass(j) * a[j];
    return out;
}

}  // namespace

StepOperator assemble_step_operator(const ModelSetup& setup, const Field& w_star, std::size_t step) {
    const double cg = setup.reaction.semi_monotone_constant();
    const double tau_star = 1.0 / (8.0 * (cg + 1.0));
    if (!(setup.tau() < tau_star)) {
        throw AssumptionError("A5", "assumption (A5) violated: tau = " + std::to_string(setup.tau()) +
                                        " >= tau* = " + std::to_string(tau_star));
    }
    return StepOperator{step, step_hessian(setup, w_star)};
}

std::vector<StepOperator> assemble_step_operators(const ModelSetup& setup, const StateTrajectory& traj) {
    if (traj.w.size() != setup.steps + 1) throw PreconditionError("state trajectory does not match the setup");
    std::vector<StepOperator> ops;
    ops.reserve(setup.steps);
    for (std::size_t i = 1; i <= setup.steps; ++i) ops.push_back(assemble_step_operator(setup, traj.w[i], i));
    return ops;
}

SensitivityTrajectory solve_linearization(const ModelSetup& setup, const std::vector<StepOperator>& ops,
                                          const Trajectory& direction) {
    require_steps(setup, direction, "linearization direction");
    const Grid& grid = setup.grid;
    const double inv_tau = 1.0 / setup.tau();
    const double mu = setup.physics.control_weight;
    SensitivityTrajectory out;
    out.forcing = direction;
    Field chi_prev(grid.node_count(), 0.0);
    for (std::size_t i = 1; i <= setup.steps; ++i) {
        Field rhs = mass_times(grid, direction[i - 1], mu);
        rhs.axpy(1.0, mass_times(grid, chi_prev, inv_tau));
        const TridiagonalSystem& a = ops[i - 1].matrix;
        Field chi = solve_tridiagonal(a, rhs);
        out.solve_residuals.push_back(relative_residual(a, chi, rhs));
        chi_prev = chi;
        out.fields.push_back(std::move(chi));
    }
    return out;
}

SensitivityTrajectory solve_linearization(const ModelSetup& setup, const StateTrajectory& traj,
                                          const Trajectory& direction) {
    return solve_linearization(setup, assemble_step_operators(setup, traj), direction);
}

SensitivityTrajectory solve_adjoint(const ModelSetup& setup, const std::vector<StepOperator>& ops,
                                    const Trajectory& forcing) {
    require_steps(setup, forcing, "adjoint forcing");
    const Grid& grid = setup.grid;
    const double inv_tau = 1.0 / setup.tau();
    const std::size_t n = setup.steps;
    SensitivityTrajectory out;
    out.forcing = forcing;
    out.fields.assign(n, Field(grid.node_count(), 0.0));
    out.solve_residuals.assign(n, 0.0);
    Field p_next(grid.node_count(), 0.0);
    for (std::size_t i = n; i >= 1; --i) {
        Field rhs = mass_times(grid, forcing[i - 1], 1.0);
        rhs.axpy(1.0, mass_times(grid, p_next, inv_tau));
        const TridiagonalSystem& a = ops[i - 1].matrix;
        Field p = solve_tridiagonal(a, rhs);
        out.solve_residuals[i - 1] = relative_residual(a, p, rhs);
        p_next = p;
        out.fields[i - 1] = std::move(p);
    }
    return out;
}

SensitivityTrajectory solve_adjoint(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& forcing) {
    return solve_adjoint(setup, assemble_step_operators(setup, traj), forcing);
}

Trajectory tracking_forcing(const ModelSetup& setup, const StateTrajectory& traj) {
    const double mw = setup.physics.tracking_weight;
    Trajectory v;
    v.reserve(setup.steps);
    for (std::size_t i = 1; i <= setup.steps; ++i) {
        Field f = traj.w[i] - setup.target[i - 1];
        f *= mw;
        v.push_back(std::move(f));
    }
    return v;
}

double duality_gap(const ModelSetup& setup, const Trajectory& p, const Trajectory& direction, const Trajectory& forcing,
                   const Trajectory& chi) {
    const double mu = setup.physics.control_weight;
    const double lhs = mu * inner_product(setup.grid, p, direction);
    const double rhs = inner_product(setup.grid, forcing, chi);
    return std::abs(lhs - rhs);
}

double duality_scale(const ModelSetup& setup, const Trajectory& p, const Trajectory& direction,
                     const Trajectory& forcing, const Trajectory& chi) {
    const Grid& g = setup.grid;
    return 1.0 + setup.physics.control_weight * norm_x(g, p) * norm_x(g, direction) +
           norm_x(g, forcing) * norm_x(g, chi);
}

ZetaForms compute_zeta(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& p) {
    require_steps(setup, p, "adjoint p");
    const Grid& grid = setup.grid;
    const double inv_tau = 1.0 / setup.tau();
    const double nu2 = setup.physics.nu * setup.physics.nu;
    const Trajectory v = tracking_forcing(setup, traj);
    const Field zero(grid.node_count(), 0.0);

    ZetaForms out;
    double mismatch = 0.0;
    double scale = 0.0;
    for (std::size_t i = 1; i <= setup.steps; ++i) {
        const Field& w = traj.w[i];
        const Field& pi = p[i - 1];
        const Field& p_next = i < setup.steps ? p[i] : zero;
        const EdgeField dw = forward_diff(grid, w);
        const EdgeField dp = forward_diff(grid, pi);

        // -div applied to edge data gives the pairing coefficients of h sum_e q_e Dphi_e.
        EdgeField q_curv(dw.size());
        EdgeField q_visc(dw.size());
        for (std::size_t e = 0; e < dw.size(); ++e) {
            q_curv[e] = setup.flux.second_derivative(dw[e]) * dp[e];
            q_visc[e] = nu2 * dp[e];
        }
        const Field div_curv = neumann_divergence(grid, q_curv);
        const Field div_visc = neumann_divergence(grid, q_visc);

        DualField functional(grid.node_count());
        DualField defect(grid.node_count());
        for (std::size_t j = 0; j < functional.size(); ++j) {
            const double m = grid.mass(j);
            functional[j] = m * (-div_curv[j] + setup.constraint.derivative(w[j]) * pi[j]);
            defect[j] = m * (v[i - 1][j] - inv_tau * (pi[j] - p_next[j]) - setup.reaction.derivative(w[j]) * pi[j] +
                             div_visc[j]);
            mismatch = std::max(mismatch, std::abs(functional[j] - defect[j]));
            scale = std::max(scale, std::abs(functional[j]));
        }
        out.functional.push_back(std::move(functional));
        out.defect.push_back(std::move(defect));
    }
    out.relative_mismatch = mismatch / (1.0 + scale);
    return out;
}

GammaCutoff::GammaCutoff(std::function<double(double)> gamma0) : gamma0_(std::move(gamma0)) {
    if (!gamma0_) throw ConfigError("gamma cutoff: empty function");
    const double at0 = gamma0_(0.0);
    constexpr double h = 1e-6;
    const double slope0 = (gamma0_(h) - gamma0_(-h)) / (2.0 * h);
    if (std::abs(at0) > 1e-14 || std::abs(slope0) > 1e-8) {
        throw ConfigError("gamma cutoff must satisfy gamma(0) = gamma'(0) = 0");
    }
}

GammaCutoff GammaCutoff::rational() {
    return GammaCutoff([](double r) { return r * r / (1.0 + r * r); });
}

double GammaCutoff::operator()(double r, double rho) const {
    if (rho < 0.0) throw ConfigError("gamma cutoff: rho must be nonnegative");
    if (r >= rho) return gamma0_(r - rho);
    if (r <= -rho) return gamma0_(r + rho);
    return 0.0;
}

Trajectory adjoint_defect(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& p) {
    require_steps(setup, p, "adjoint p");
    const Grid& grid = setup.grid;
    const double inv_tau = 1.0 / setup.tau();
    const double nu2 = setup.physics.nu * setup.physics.nu;
    const double mw = setup.physics.tracking_weight;
    const Field zero(grid.node_count(), 0.0);
    Trajectory out;
    for (std::size_t i = 1; i <= setup.steps; ++i) {
        const Field& w = traj.w[i];
        const Field& pi = p[i - 1];
        const Field& p_next = i < setup.steps ? p[i] : zero;
        const Field lap = neumann_divergence(grid, forward_diff(grid, pi));
        Field d(grid.node_count());
        for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] = inv_tau * (pi[j] - p_next[j]) - nu2 * lap[j] + setup.reaction.derivative(w[j]) * pi[j] -
                   mw * (w[j] - setup.target[i - 1][j]);
        }
        out.push_back(std::move(d));
    }
    return out;
}

Trajectory gamma_residual(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& p,
                          const GammaCutoff& gamma, double rho) {
    if (rho < 0.0) throw ConfigError("gamma residual: rho must be nonnegative");
    Trajectory out = adjoint_defect(setup, traj, p);
    for (std::size_t i = 1; i <= setup.steps; ++i) {
        EdgeField cut = forward_diff(setup.grid, traj.w[i]);
        for (double& s : cut) s = gamma(s, rho);
        const Field nodal = edge_to_node(setup.grid, cut);
        Field& r = out[i - 1];
        for (std::size_t j = 0; j < r.size(); ++j) r[j] *= nodal[j];
    }
    return out;
}

}  // namespace ac
