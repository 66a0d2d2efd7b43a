#include "ac_control/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace ac {

void Schedule::validate() const {
    if (levels.empty()) throw ConfigError("continuation schedule is empty");
    const double floor = std::ldexp(1.0, -12);
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const auto [eps, delta] = levels[k];
        if (!(eps > 0.0 && delta > 0.0 && eps <= 1.0 && delta <= 1.0)) {
            throw ConfigError("continuation schedule entries must lie in (0, 1]");
        }
        if (k > 0 && (eps > levels[k - 1].first || delta > levels[k - 1].second)) {
            throw ConfigError("continuation schedule must be non-increasing");
        }
    }
    if (levels.back().first < floor || levels.back().second < floor) {
        throw ConfigError("continuation schedule goes below the solver floor 2^-12");
    }
}

std::pair<double, double> Schedule::seed_level() const {
    return {std::min(1.0, 2.0 * levels.front().first), std::min(1.0, 2.0 * levels.front().second)};
}

Schedule default_schedule(int levels, double eps_floor, double delta_floor) {
    if (levels < 2) throw ConfigError("continuation needs at least M = 2 levels");
    Schedule s;
    for (int m = 1; m <= levels; ++m) {
        const double v = std::ldexp(1.0, -m);
        s.levels.emplace_back(std::max(v, eps_floor), std::max(v, delta_floor));
    }
    return s;
}

FieldNorms trajectory_difference(const Grid& grid, const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size()) throw GridMismatchError("trajectory_difference: step count mismatch");
    FieldNorms out;
    double l2 = 0.0;
    double h1 = 0.0;
    for (std::size_t i = 1; i < a.size(); ++i) {
        const FieldNorms n = field_norms(grid, a[i] - b[i]);
        l2 += n.l2 * n.l2;
        h1 += n.h1 * n.h1;
        out.c0 = std::max(out.c0, n.c0);
        out.c1 = std::max(out.c1, n.c1);
    }
    out.l2 = std::sqrt(l2);
    out.h1 = std::sqrt(h1);
    return out;
}

namespace {

int total_newton(const StateTrajectory& t) {
    int n = 0;
    for (const auto& d : t.diagnostics) n += d.iterations;
    return n;
}

}  // namespace

StateContinuationResult run_state_continuation(const ModelSetup& setup_base, const Trajectory& u,
                                               const Schedule& schedule, const StepOptions& step_opts) {
    schedule.validate();
    for (double v : setup_base.initial) {
        if (std::abs(v) > 1.0) throw PreconditionError("state continuation requires |w0| <= 1 at every node");
    }
    std::vector<std::pair<double, double>> levels{schedule.seed_level()};
    levels.insert(levels.end(), schedule.levels.begin(), schedule.levels.end());

    StateContinuationResult out;
    for (std::size_t m = 0; m < levels.size(); ++m) {
        const ModelSetup setup = setup_base.with_regularization(levels[m].first, levels[m].second);
        const Trajectory* warm = m > 0 ? &out.states.back().w : nullptr;
        StateTrajectory traj;
        try {
            traj = solve_state(setup, u, step_opts, warm);
        } catch (const NonconvergenceError& e) {
            throw NonconvergenceError("continuation level m = " + std::to_string(m) + ": " + e.what(), e.step(),
                                      e.last_iterate(), e.residual_history());
        }
        StateContinuationRow row;
        row.m = static_cast<int>(m);
        row.epsilon = levels[m].first;
        row.delta = levels[m].second;
        if (m > 0) row.difference = trajectory_difference(setup.grid, traj.w, out.states.back().w);
        row.cost = cost(setup, traj, u);
        row.overshoot = max_overshoot(traj.w);
        row.newton_iterations = total_newton(traj);
        out.rows.push_back(row);
        out.states.push_back(std::move(traj));
    }
    return out;
}

std::vector<Field> cosine_test_fields(const Grid& grid, std::size_t count) {
    std::vector<Field> out;
    const double length = 2.0 * grid.half_length();
    for (std::size_t k = 0; k < count; ++k) {
        Field f(grid.node_count());
        for (std::size_t j = 0; j < f.size(); ++j) {
            f[j] = std::cos(static_cast<double>(k) * std::numbers::pi * (grid.node(j) + grid.half_length()) / length);
        }
        out.push_back(std::move(f));
    }
    return out;
}

ControlContinuationResult run_control_continuation(const ModelSetup& setup_base, const Schedule& schedule,
                                                   const OptimizeOptions& opt_opts, const StepOptions& step_opts) {
    schedule.validate();
    std::vector<std::pair<double, double>> levels{schedule.seed_level()};
    levels.insert(levels.end(), schedule.levels.begin(), schedule.levels.end());
    const std::vector<Field> tests = cosine_test_fields(setup_base.grid);

    ControlContinuationResult out;
    Trajectory u = zero_controls(setup_base);
    for (std::size_t m = 0; m < levels.size(); ++m) {
        const ModelSetup setup = setup_base.with_regularization(levels[m].first, levels[m].second);
        OptimizeResult opt = optimize(setup, u, opt_opts, step_opts);

        ControlContinuationRow row;
        row.m = static_cast<int>(m);
        row.epsilon = levels[m].first;
        row.delta = levels[m].second;
        row.cost = opt.cost;
        row.stationarity = opt.stationarity;
        row.status = opt.status;
        row.flagged = opt.status != OptimizeStatus::converged;
        row.iterations = opt.iterations;
        row.overshoot = max_overshoot(opt.final_state.state.w);
        if (m > 0) {
            const Grid& grid = setup.grid;
            const Trajectory& prev = out.controls.back();
            double diff_sq = 0.0;
            for (std::size_t i = 0; i < setup.steps; ++i) {
                const Field d = opt.control[i] - prev[i];
                diff_sq += inner_product(grid, d, d);
                for (const Field& phi : tests) {
                    row.pairing_difference = std::max(row.pairing_difference, std::abs(inner_product(grid, d, phi)));
                }
            }
            row.control_difference = std::sqrt(diff_sq);
            row.state_difference =
                trajectory_difference(grid, opt.final_state.state.w, out.solutions.back().state.w);
        }
        u = opt.control;
        out.rows.push_back(row);
        out.setups.push_back(setup);
        out.controls.push_back(std::move(opt.control));
        out.solutions.push_back(std::move(opt.final_state));
    }
    return out;
}

Field nodal_slope(const Grid& grid, const Field& w) {
    EdgeField s = forward_diff(grid, w);
    for (double& v : s) v = std::abs(v);
    return edge_to_node(grid, s);
}

LimitReport limit_diagnostics(const ControlContinuationResult& result, const std::vector<double>& rhos,
                              const GammaCutoff& gamma) {
    LimitReport report;
    report.rhos = rhos;
    for (std::size_t m = 0; m < result.rows.size(); ++m) {
        const ModelSetup& setup = result.setups[m];
        const Grid& grid = setup.grid;
        const StateTrajectory& state = result.solutions[m].state;
        const Trajectory& p = result.solutions[m].adjoint.fields;

        LimitRow row;
        row.m = result.rows[m].m;
        row.epsilon = result.rows[m].epsilon;
        row.delta = result.rows[m].delta;
        row.stationarity = result.rows[m].stationarity;

        const ZetaForms zeta = compute_zeta(setup, state, p);
        row.zeta_mismatch = zeta.relative_mismatch;
        const Trajectory defect = adjoint_defect(setup, state, p);
        row.gamma0_residual = norm_x(grid, gamma_residual(setup, state, p, gamma, 0.0));

        std::vector<Field> slopes;
        double riesz_sq = 0.0;
        for (std::size_t i = 1; i <= setup.steps; ++i) {
            slopes.push_back(nodal_slope(grid, state.w[i]));
            for (double c : zeta.functional[i - 1]) row.zeta_l1 += std::abs(c);
            const Field r = riesz_representative(grid, zeta.functional[i - 1]);
            riesz_sq += inner_product_y(grid, r, r);
        }
        row.zeta_riesz = std::sqrt(riesz_sq);

        for (double rho : rhos) {
            double on_support = 0.0;
            double defect_sq = 0.0;
            double reconstruction = 0.0;
            for (std::size_t i = 1; i <= setup.steps; ++i) {
                const DualField& z = zeta.functional[i - 1];
                for (std::size_t j = 0; j < z.size(); ++j) {
                    if (slopes[i - 1][j] < rho) continue;
                    on_support += std::abs(z[j]);
                    const double d = defect[i - 1][j];
                    defect_sq += grid.mass(j) * d * d;
                    reconstruction = std::max(reconstruction, std::abs(z[j] / grid.mass(j) + d));
                }
            }
            row.zeta_fraction.push_back(row.zeta_l1 > 0.0 ? on_support / row.zeta_l1 : 0.0);
            row.defect_on_support.push_back(std::sqrt(defect_sq));
            row.reconstruction_error.push_back(reconstruction);
            row.gamma_rho_residual.push_back(norm_x(grid, gamma_residual(setup, state, p, gamma, rho)));
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace ac
