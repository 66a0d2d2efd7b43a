#pragma once

#include <cstddef>
#include <vector>

#include "ac_control/model.hpp"

namespace ac {

struct StepOptions {
    double newton_tol = 1e-11;  // on the mass-weighted residual L2 norm, relative to 1 + |u_i|_X
    int max_newton = 50;
    double armijo_slope = 1e-4;
    double backtrack = 0.5;
    double min_step = 1e-12;

    /// Throws ConfigError unless every entry is positive and backtrack lies in (0, 1).
    void validate() const;
};

struct StepDiagnostics {
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> residual_history;
    int gradient_fallbacks = 0;
    bool rounding_limited = false;  // stopped on a stagnating residual within 1000x the tolerance
};

struct StateTrajectory {
    Trajectory w;                      // w[0] = w0, ..., w[n]
    std::vector<EdgeField> flux;       // flux[i-1] = f'(Dw_i), the selection varpi*_i
    Trajectory xi;                     // xi[i-1] = K(w_i)
    std::vector<StepDiagnostics> diagnostics;  // diagnostics[i-1]

    std::size_t steps() const noexcept { return diagnostics.size(); }
};

/// Per-step functional minimized by one implicit step:
///   (1/2tau)|w - w_prev|_X^2 + Phi(w) + sum m Khat(w) + sum m G(w) - (M_u u_i, w)_X,
/// with Phi(w) = h sum_e [f(s_e) + nu^2 s_e^2 / 2], s = Dw.
double step_energy(const ModelSetup& setup, const Field& w_prev, const Field& u_i, const Field& w);

/// Nodal residual (1/tau)(w - w_prev) - div(f'(Dw) + nu^2 Dw) + K(w) + g(w) - M_u u_i.
/// Equals the gradient of step_energy divided by the mass weights.
Field step_residual(const ModelSetup& setup, const Field& w_prev, const Field& u_i, const Field& w);

/// Hessian of step_energy at w:
///   (1/tau) M + S(f''(Dw) + nu^2) + M diag(K'(w) + g'(w)).
/// Throws PreconditionError if any diagonal entry is not positive.
TridiagonalSystem step_hessian(const ModelSetup& setup, const Field& w);

struct StepResult {
    Field w;
    StepDiagnostics diagnostics;
};

/// Damped Newton with Armijo backtracking on step_energy. `initial_guess`
/// defaults to w_prev. Throws NonconvergenceError after max_newton iterations.
StepResult solve_step(const ModelSetup& setup, const Field& w_prev, const Field& u_i, const StepOptions& opts = {},
                      const Field* initial_guess = nullptr);

/// Sequential implicit stepping i = 1..n. `u` holds n control fields.
/// `warm_start`, if given, supplies Newton initial iterates (warm_start[i] for step i).
/// Requires a validated setup with smooth kinds.
StateTrajectory solve_state(const ModelSetup& setup, const Trajectory& u, const StepOptions& opts = {},
                            const Trajectory* warm_start = nullptr);

/// Phi(w) + sum m Khat(w) + sum m G(w).
double free_energy(const ModelSetup& setup, const Field& w);

struct LedgerEntry {
    std::size_t step = 0;
    double kinetic = 0.0;      // (1/2tau)|w_i - w_{i-1}|_X^2
    double free_energy = 0.0;  // F(w_i)
    double energy_change = 0.0;
    double rhs = 0.0;          // tau M_u^2 |u_i|_X^2
    double slack = 0.0;        // rhs - kinetic - energy_change
    bool passed = true;
    bool quadrature_boundary = false;  // failed by less than 1e-9 absolute
};

/// Per-step energy inequality; passes iff slack >= -1e-9 (1 + |F(w_{i-1})|).
std::vector<LedgerEntry> energy_ledger_check(const ModelSetup& setup, const Trajectory& w, const Trajectory& u);
bool ledger_passed(const std::vector<LedgerEntry>& ledger) noexcept;

struct XiBoundEntry {
    std::size_t step = 0;
    double lhs = 0.0;              // |xi_i|_X^2 / 4
    double rhs_linear = 0.0;       // ... + 2 M_u |u_i|^2
    double rhs_squared = 0.0;      // ... + 2 M_u^2 |u_i|^2
    double slack_linear = 0.0;
    double slack_squared = 0.0;
    double max_xi = 0.0;
    double max_overshoot = 0.0;    // max (|w_i| - 1)^+
};

/// Constraint-force estimate, both M_u and M_u^2 variants of the forcing term.
std::vector<XiBoundEntry> xi_bound_check(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& u);

/// max_i max_j (|w_ij| - 1)^+ over steps 1..n.
double max_overshoot(const Trajectory& w);

Trajectory zero_controls(const ModelSetup& setup);

namespace detail {
/// solve_state without re-running validate_assumptions; callers have validated once.
StateTrajectory solve_state_prevalidated(const ModelSetup& setup, const Trajectory& u, const StepOptions& opts,
                                         const Trajectory* warm_start = nullptr);
}  // namespace detail

}  // namespace ac
