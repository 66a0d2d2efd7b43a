#include "ac_control/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ac {

void StepOptions::validate() const {
    if (!(newton_tol > 0.0) || max_newton < 1 || !(armijo_slope > 0.0) || !(min_step > 0.0)) {
        throw ConfigError("solver options must be positive");
    }
    if (!(backtrack > 0.0 && backtrack < 1.0)) throw ConfigError("solver backtrack factor must lie in (0, 1)");
}

namespace {

void require_smooth(const ModelSetup& setup) {
    if (!setup.flux.smooth()) {
        throw PreconditionError("flux kind 'abs' (epsilon = 0) is a limit target and cannot be solved directly");
    }
    if (!setup.constraint.solvable()) {
        throw PreconditionError("constraint kind 'hard' (delta = 0) is a limit target and cannot be solved directly");
    }
}

void require_field(const ModelSetup& setup, const Field& f, const char* what) {
    if (f.size() != setup.grid.node_count()) {
        throw GridMismatchError(std::string(what) + ": wrong number of nodal values");
    }
    for (double v : f) {
        if (!std::isfinite(v)) throw PreconditionError(std::string(what) + ": non-finite value");
    }
}

/// Flux energy Phi(w) = h sum_e [f(s_e) + nu^2 s_e^2 / 2].
double flux_energy(const ModelSetup& setup, const EdgeField& s) {
    const double nu2 = setup.physics.nu * setup.physics.nu;
    double acc = 0.0;
    for (double v : s) acc += setup.flux.value(v) + 0.5 * nu2 * v * v;
    return setup.grid.spacing() * acc;
}

double local_energy(const ModelSetup& setup, const Field& w) {
    const auto m = setup.grid.mass();
    double acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        acc += m[j] * (setup.constraint.potential(w[j]) + setup.reaction.potential(w[j]));
    }
    return acc;
}

/// Mass-weighted gradient M r of the step energy.
Field weighted(const Grid& grid, Field r) {
    for (std::size_t j = 0; j < r.size(); ++j) r[j] *= grid.mass(j);
    return r;
}

double dot(const Field& a, const Field& b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += a[j] * b[j];
    return acc;
}

/// Exact minimization of t -> E(w + t d) along a descent direction of a strictly convex energy.
double exact_line_search(const ModelSetup& setup, const Field& w_prev, const Field& u_i, const Field& w,
                         const Field& d) {
    auto slope_at = [&](double t) {
        Field trial = w;
        trial.axpy(t, d);
        return dot(weighted(setup.grid, step_residual(setup, w_prev, u_i, trial)), d);
    };
    double lo = 0.0;
    double hi = 1.0;
    // Expand until the directional derivative turns nonnegative.
    for (int k = 0; k < 200 && slope_at(hi) < 0.0; ++k) {
        lo = hi;
        hi *= 2.0;
    }
    for (int k = 0; k < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++k) {
        const double mid = 0.5 * (lo + hi);
        if (slope_at(mid) < 0.0) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double step_energy(const ModelSetup& setup, const Field& w_prev, const Field& u_i, const Field& w) {
    require_smooth(setup);
    require_field(setup, w, "step_energy(w)");
    require_field(setup, w_prev, "step_energy(w_prev)");
    require_field(setup, u_i, "step_energy(u)");
    const Grid& grid = setup.grid;
    const double tau = setup.tau();
    const double mu = setup.physics.control_weight;
    const auto m = grid.mass();
    double kinetic = 0.0;
    double forcing = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double dw = w[j] - w_prev[j];
        kinetic += m[j] * dw * dw;
        forcing += m[j] * mu * u_i[j] * w[j];
    }
    return kinetic / (2.0 * tau) + flux_energy(setup, forward_diff(grid, w)) + local_energy(setup, w) - forcing;
}

Field step_residual(const ModelSetup& setup, const Field& w_prev, const Field& u_i, const Field& w) {
    require_smooth(setup);
    const Grid& grid = setup.grid;
    const double inv_tau = 1.0 / setup.tau();
    const double nu2 = setup.physics.nu * setup.physics.nu;
    const double mu = setup.physics.control_weight;

    EdgeField q = forward_diff(grid, w);
    for (double& s : q) s = setup.flux.derivative(s) + nu2 * s;
    Field r = neumann_divergence(grid, q);
    for (std::size_t j = 0; j < r.size(); ++j) {
        r[j] = inv_tau * (w[j] - w_prev[j]) - r[j] + setup.constraint.value(w[j]) + setup.reaction.value(w[j]) -
               mu * u_i[j];
    }
    return r;
}

namespace {

/// X-norm of the residual's terms taken in absolute value; the rounding floor of the residual is a
/// small multiple of machine epsilon times this.
double residual_magnitude(const ModelSetup& setup, const Field& w_prev, const Field& u_i, const Field& w) {
    const Grid& grid = setup.grid;
    const double inv_tau = 1.0 / setup.tau();
    const double inv_h = 1.0 / grid.spacing();
    const double nu2 = setup.physics.nu * setup.physics.nu;
    const double mu = setup.physics.control_weight;
    EdgeField q = forward_diff(grid, w);
    for (double& s : q) s = std::abs(setup.flux.derivative(s)) + nu2 * std::abs(s);
    Field a(w.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double left = j > 0 ? q[j - 1] : 0.0;
        const double right = j < q.size() ? q[j] : 0.0;
        a[j] = inv_tau * (std::abs(w[j]) + std::abs(w_prev[j])) + inv_h * (left + right) +
               std::abs(setup.constraint.value(w[j])) + std::abs(setup.reaction.value(w[j])) + mu * std::abs(u_i[j]);
    }
    return norm_x(grid, a);
}

}  // namespace

TridiagonalSystem step_hessian(const ModelSetup& setup, const Field& w) {
    require_smooth(setup);
    const Grid& grid = setup.grid;
    const double inv_tau = 1.0 / setup.tau();
    const double nu2 = setup.physics.nu * setup.physics.nu;

    EdgeField c = forward_diff(grid, w);
    for (double& s : c) s = setup.flux.second_derivative(s) + nu2;
    TridiagonalSystem h = assemble_stiffness(grid, c);
    for (std::size_t j = 0; j < h.size(); ++j) {
        h.diag[j] += grid.mass(j) * (inv_tau + setup.constraint.derivative(w[j]) + setup.reaction.derivative(w[j]));
        if (!(h.diag[j] > 0.0)) {
            throw PreconditionError("step operator has a nonpositive diagonal at node " + std::to_string(j) +
                                    "; is tau < tau*?");
        }
    }
    return h;
}

StepResult solve_step(const ModelSetup& setup, const Field& w_prev, const Field& u_i, const StepOptions& opts,
                      const Field* initial_guess) {
    require_smooth(setup);
    require_field(setup, w_prev, "solve_step(w_prev)");
    require_field(setup, u_i, "solve_step(u)");
    const Grid& grid = setup.grid;
    const double requested = opts.newton_tol * (1.0 + norm_x(grid, u_i));

    StepResult out{initial_guess ? *initial_guess : w_prev, {}};
    if (initial_guess) require_field(setup, *initial_guess, "solve_step(initial guess)");
    Field& w = out.w;
    StepDiagnostics& diag = out.diagnostics;

    Field residual = step_residual(setup, w_prev, u_i, w);
    double res_norm = norm_x(grid, residual);
    diag.residual_history.push_back(res_norm);
    // The tolerance cannot go below what rounding in the residual evaluation allows.
    constexpr double rounding = 256.0 * std::numeric_limits<double>::epsilon();
    double target = std::max(requested, rounding * residual_magnitude(setup, w_prev, u_i, w));

    for (int it = 0; it < opts.max_newton; ++it) {
        if (res_norm <= target) {
            diag.iterations = it;
            diag.residual_norm = res_norm;
            return out;
        }
        const Field gradient = weighted(grid, residual);
        Field direction = solve_tridiagonal(step_hessian(setup, w), gradient);
        direction *= -1.0;
        const double slope = dot(gradient, direction);
        const double e0 = step_energy(setup, w_prev, u_i, w);
        // Energy differences below this are rounding noise; fall back on the residual there.
        const double noise = 1e-13 * (1.0 + std::abs(e0));

        double alpha = 1.0;
        bool accepted = false;
        Field trial;
        Field trial_residual;
        double trial_norm = 0.0;
        while (alpha >= opts.min_step) {
            trial = w;
            trial.axpy(alpha, direction);
            const double e1 = step_energy(setup, w_prev, u_i, trial);
            const bool armijo = e1 <= e0 + opts.armijo_slope * alpha * slope;
            bool flat = false;
            if (!armijo && std::abs(e1 - e0) <= noise) {
                trial_residual = step_residual(setup, w_prev, u_i, trial);
                trial_norm = norm_x(grid, trial_residual);
                flat = trial_norm < res_norm;
            }
            if (armijo || flat) {
                if (armijo) {
                    trial_residual = step_residual(setup, w_prev, u_i, trial);
                    trial_norm = norm_x(grid, trial_residual);
                }
                accepted = true;
                break;
            }
            alpha *= opts.backtrack;
        }
        if (!accepted) {
            Field descent = gradient;
            descent *= -1.0;
            const double t = exact_line_search(setup, w_prev, u_i, w, descent);
            trial = w;
            trial.axpy(t, descent);
            trial_residual = step_residual(setup, w_prev, u_i, trial);
            trial_norm = norm_x(grid, trial_residual);
            ++diag.gradient_fallbacks;
        }
        w = std::move(trial);
        residual = std::move(trial_residual);
        const double previous = res_norm;
        res_norm = trial_norm;
        diag.residual_history.push_back(res_norm);
        target = std::max(requested, rounding * residual_magnitude(setup, w_prev, u_i, w));
        // Newton has hit the conditioning floor of the step operator: no further progress is possible.
        if (res_norm > target && res_norm >= 0.9 * previous && res_norm <= 1e3 * target) {
            diag.iterations = it + 1;
            diag.residual_norm = res_norm;
            diag.rounding_limited = true;
            return out;
        }
    }
    if (res_norm <= target) {
        diag.iterations = opts.max_newton;
        diag.residual_norm = res_norm;
        return out;
    }
    throw NonconvergenceError("damped Newton did not converge in " + std::to_string(opts.max_newton) +
                                  " iterations (residual " + std::to_string(res_norm) + ")",
                              0, w.values(), diag.residual_history);
}

namespace detail {

StateTrajectory solve_state_prevalidated(const ModelSetup& setup, const Trajectory& u, const StepOptions& opts,
                                         const Trajectory* warm_start) {
    if (u.size() != setup.steps) {
        throw PreconditionError("control trajectory needs n = " + std::to_string(setup.steps) + " fields");
    }
    if (warm_start && warm_start->size() != setup.steps + 1) {
        throw PreconditionError("warm start needs n + 1 fields");
    }
    StateTrajectory traj;
    traj.w.reserve(setup.steps + 1);
    traj.w.push_back(setup.initial);
    for (std::size_t i = 1; i <= setup.steps; ++i) {
        const Field* guess = warm_start ? &(*warm_start)[i] : nullptr;
        StepResult step;
        try {
            step = solve_step(setup, traj.w[i - 1], u[i - 1], opts, guess);
        } catch (const NonconvergenceError& e) {
            throw NonconvergenceError("step " + std::to_string(i) + ": " + e.what(), i, e.last_iterate(),
                                      e.residual_history());
        }
        EdgeField flux = forward_diff(setup.grid, step.w);
        for (double& s : flux) s = setup.flux.derivative(s);
        Field xi(step.w.size());
        for (std::size_t j = 0; j < xi.size(); ++j) xi[j] = setup.constraint.value(step.w[j]);
        traj.flux.push_back(std::move(flux));
        traj.xi.push_back(std::move(xi));
        traj.diagnostics.push_back(std::move(step.diagnostics));
        traj.w.push_back(std::move(step.w));
    }
    return traj;
}

}  // namespace detail

StateTrajectory solve_state(const ModelSetup& setup, const Trajectory& u, const StepOptions& opts,
                            const Trajectory* warm_start) {
    opts.validate();
    require_valid(setup);
    require_smooth(setup);
    return detail::solve_state_prevalidated(setup, u, opts, warm_start);
}

double free_energy(const ModelSetup& setup, const Field& w) {
    return flux_energy(setup, forward_diff(setup.grid, w)) + local_energy(setup, w);
}

std::vector<LedgerEntry> energy_ledger_check(const ModelSetup& setup, const Trajectory& w, const Trajectory& u) {
    if (w.size() != u.size() + 1) throw PreconditionError("ledger: need n + 1 states for n controls");
    const Grid& grid = setup.grid;
    const double mu = setup.physics.control_weight;
    std::vector<LedgerEntry> out;
    double previous = free_energy(setup, w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) {
        LedgerEntry e;
        e.step = i;
        const double tau = setup.tau();
        const Field diff = w[i] - w[i - 1];
        e.kinetic = inner_product(grid, diff, diff) / (2.0 * tau);
        e.free_energy = free_energy(setup, w[i]);
        e.energy_change = e.free_energy - previous;
        e.rhs = tau * mu * mu * inner_product(grid, u[i - 1], u[i - 1]);
        e.slack = e.rhs - e.kinetic - e.energy_change;
        const double tol = 1e-9 * (1.0 + std::abs(previous));
        e.passed = e.slack >= -tol;
        e.quadrature_boundary = e.passed && e.slack < 0.0;
        out.push_back(e);
        previous = e.free_energy;
    }
    return out;
}

bool ledger_passed(const std::vector<LedgerEntry>& ledger) noexcept {
    return std::all_of(ledger.begin(), ledger.end(), [](const LedgerEntry& e) { return e.passed; });
}

std::vector<XiBoundEntry> xi_bound_check(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& u) {
    const Grid& grid = setup.grid;
    const double tau = setup.tau();
    const double cg = setup.reaction.semi_monotone_constant();
    const double mu = setup.physics.control_weight;
    const double g0_sq = setup.reaction.a0() * setup.reaction.a0() * 2.0 * grid.half_length();
    std::vector<XiBoundEntry> out;
    for (std::size_t i = 1; i <= traj.steps(); ++i) {
        XiBoundEntry e;
        e.step = i;
        const Field& xi = traj.xi[i - 1];
        const Field diff = traj.w[i] - traj.w[i - 1];
        const double u_sq = inner_product(grid, u[i - 1], u[i - 1]);
        e.lhs = 0.25 * inner_product(grid, xi, xi);
        const double common = inner_product(grid, diff, diff) / (tau * tau) +
                              cg * cg * inner_product(grid, traj.w[i], traj.w[i]) + 2.0 * g0_sq;
        e.rhs_linear = common + 2.0 * mu * u_sq;
        e.rhs_squared = common + 2.0 * mu * mu * u_sq;
        e.slack_linear = e.rhs_linear - e.lhs;
        e.slack_squared = e.rhs_squared - e.lhs;
        for (std::size_t j = 0; j < xi.size(); ++j) {
            e.max_xi = std::max(e.max_xi, std::abs(xi[j]));
            e.max_overshoot = std::max(e.max_overshoot, std::abs(traj.w[i][j]) - 1.0);
        }
        out.push_back(e);
    }
    return out;
}

double max_overshoot(const Trajectory& w) {
    double out = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        for (double v : w[i]) out = std::max(out, std::abs(v) - 1.0);
    }
    return out;
}

Trajectory zero_controls(const ModelSetup& setup) {
    return Trajectory(setup.steps, Field(setup.grid.node_count(), 0.0));
}

}  // namespace ac
