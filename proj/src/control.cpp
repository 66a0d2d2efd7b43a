#include "ac_control/control.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>

namespace ac {

std::string_view to_string(StepRule rule) noexcept {
    switch (rule) {
        case StepRule::armijo_backtracking: return "armijo_backtracking";
        case StepRule::barzilai_borwein_safeguarded: return "barzilai_borwein_safeguarded";
    }
    return "?";
}

StepRule parse_step_rule(std::string_view name) {
    if (name == "armijo_backtracking") return StepRule::armijo_backtracking;
    if (name == "barzilai_borwein_safeguarded") return StepRule::barzilai_borwein_safeguarded;
    throw ConfigError("unknown step rule '" + std::string(name) +
                      "' (armijo_backtracking, barzilai_borwein_safeguarded)");
}

std::string_view to_string(OptimizeStatus status) noexcept {
    switch (status) {
        case OptimizeStatus::converged: return "converged";
        case OptimizeStatus::max_iterations: return "max_iterations";
        case OptimizeStatus::stalled: return "stalled";
    }
    return "?";
}

void OptimizeOptions::validate() const {
    if (max_iters < 1) throw ConfigError("optimizer max_iters must be at least 1");
    if (!(tolerance > 0.0) || !(initial_step > 0.0) || !(armijo_slope > 0.0) || max_backtracks < 1) {
        throw ConfigError("optimizer tolerances and steps must be positive");
    }
}

double cost(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& u) {
    const Grid& grid = setup.grid;
    double tracking = 0.0;
    for (std::size_t i = 1; i <= setup.steps; ++i) {
        const Field diff = traj.w[i] - setup.target[i - 1];
        tracking += inner_product(grid, diff, diff);
    }
    return 0.5 * setup.physics.tracking_weight * tracking + 0.5 * setup.physics.control_weight * inner_product(grid, u, u);
}

namespace {

GradientResult gradient_prevalidated(const ModelSetup& setup, const Trajectory& u, const StepOptions& step_opts) {
    GradientResult out;
    out.state = detail::solve_state_prevalidated(setup, u, step_opts);
    out.cost = cost(setup, out.state, u);
    out.adjoint = solve_adjoint(setup, out.state, tracking_forcing(setup, out.state));
    const double mu = setup.physics.control_weight;
    out.gradient.reserve(setup.steps);
    for (std::size_t i = 0; i < setup.steps; ++i) {
        Field g = out.adjoint.fields[i] + u[i];
        g *= mu;
        out.gradient.push_back(std::move(g));
    }
    return out;
}

double cost_prevalidated(const ModelSetup& setup, const Trajectory& u, const StepOptions& step_opts) {
    return cost(setup, detail::solve_state_prevalidated(setup, u, step_opts), u);
}

Trajectory add_scaled(const Trajectory& u, double s, const Trajectory& d) {
    Trajectory out = u;
    for (std::size_t i = 0; i < out.size(); ++i) out[i].axpy(s, d[i]);
    return out;
}

/// Runs fn(k) for k in [0, count) on at most `threads` workers.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < count && !failed; k = next++) {
                    try {
                        fn(k);
                    } catch (...) {
                        if (!failed.exchange(true)) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace

GradientResult gradient(const ModelSetup& setup, const Trajectory& u, const StepOptions& step_opts) {
    step_opts.validate();
    require_valid(setup);
    return gradient_prevalidated(setup, u, step_opts);
}

OptimizeResult optimize(const ModelSetup& setup, const Trajectory& u0, const OptimizeOptions& opts,
                        const StepOptions& step_opts) {
    opts.validate();
    step_opts.validate();
    require_valid(setup);
    const Grid& grid = setup.grid;

    OptimizeResult result;
    result.control = u0;
    GradientResult current = gradient_prevalidated(setup, u0, step_opts);
    long evaluations = 1;
    const double target = opts.tolerance * (1.0 + norm_x(grid, u0));
    double grad_norm = norm_x(grid, current.gradient);
    result.history.push_back({0, current.cost, grad_norm, 0.0, evaluations});

    double step = opts.initial_step;
    int iter = 0;
    result.status = OptimizeStatus::max_iterations;
    for (; iter < opts.max_iters; ++iter) {
        if (grad_norm <= target) {
            result.status = OptimizeStatus::converged;
            break;
        }
        // Steepest descent in X: direction -grad, directional derivative -|grad|^2.
        const double slope = -grad_norm * grad_norm;
        double alpha = step;
        bool accepted = false;
        GradientResult trial_grad;
        Trajectory trial;
        for (int b = 0; b < opts.max_backtracks; ++b) {
            trial = add_scaled(result.control, -alpha, current.gradient);
            try {
                trial_grad = gradient_prevalidated(setup, trial, step_opts);
                ++evaluations;
                if (trial_grad.cost <= current.cost + opts.armijo_slope * alpha * slope) {
                    accepted = true;
                    break;
                }
            } catch (const NonconvergenceError&) {
                ++evaluations;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            result.status = OptimizeStatus::stalled;
            break;
        }
        double next_step = opts.initial_step;
        if (opts.step_rule == StepRule::barzilai_borwein_safeguarded) {
            // s = u_{k+1} - u_k = -alpha g_k,  y = g_{k+1} - g_k
            double sy = 0.0;
            double ss = 0.0;
            for (std::size_t i = 0; i < setup.steps; ++i) {
                const Field y = trial_grad.gradient[i] - current.gradient[i];
                const Field s = -alpha * current.gradient[i];
                sy += inner_product(grid, s, y);
                ss += inner_product(grid, s, s);
            }
            if (sy > 0.0) next_step = std::clamp(ss / sy, 1e-8, 1e8);
        }
        step = next_step;
        result.control = std::move(trial);
        current = std::move(trial_grad);
        grad_norm = norm_x(grid, current.gradient);
        result.history.push_back({iter + 1, current.cost, grad_norm, alpha, evaluations});
    }
    if (result.status == OptimizeStatus::max_iterations && grad_norm <= target) {
        result.status = OptimizeStatus::converged;
    }
    result.iterations = iter;
    result.stationarity = grad_norm;
    result.cost = current.cost;
    result.final_state = std::move(current);
    return result;
}

Trajectory random_direction(const ModelSetup& setup, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Trajectory h(setup.steps, Field(setup.grid.node_count()));
    for (Field& f : h) {
        for (double& v : f) v = normal(rng);
    }
    const double n = norm_x(setup.grid, h);
    if (n > 0.0) {
        for (Field& f : h) f *= 1.0 / n;
    }
    return h;
}

unsigned probe_threads(unsigned requested) {
    if (requested == 0) {
        if (const char* env = std::getenv("AC_CONTROL_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v > 0) requested = static_cast<unsigned>(v);
        }
    }
    if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
    return requested;
}

FdReport fd_gradient_check(const ModelSetup& setup, const Trajectory& u, std::size_t count, double lambda,
                           const std::vector<double>& taylor_lambdas, std::uint64_t seed, const StepOptions& step_opts,
                           unsigned threads) {
    if (!(lambda > 0.0)) throw PreconditionError("fd_gradient_check: lambda must be positive");
    for (double l : taylor_lambdas) {
        if (!(l > 0.0)) throw PreconditionError("fd_gradient_check: Taylor lambdas must be positive");
    }
    step_opts.validate();
    require_valid(setup);
    const GradientResult base = gradient_prevalidated(setup, u, step_opts);

    FdReport report;
    report.lambda = lambda;
    report.base_cost = base.cost;
    report.directions.resize(count);
    std::vector<std::vector<double>> remainders(count, std::vector<double>(taylor_lambdas.size()));

    // Direction k is seeded with seed + k so the report does not depend on scheduling.
    parallel_for(count, probe_threads(threads), [&](std::size_t k) {
        const Trajectory h = random_direction(setup, seed + k);
        const double adjoint_slope = inner_product(setup.grid, base.gradient, h);
        const double plus = cost_prevalidated(setup, add_scaled(u, lambda, h), step_opts);
        const double minus = cost_prevalidated(setup, add_scaled(u, -lambda, h), step_opts);
        FdDirectionResult& r = report.directions[k];
        r.adjoint_slope = adjoint_slope;
        r.fd_slope = (plus - minus) / (2.0 * lambda);
        r.relative_error = std::abs(r.fd_slope - adjoint_slope) / std::max(std::abs(adjoint_slope), 1e-14);
        for (std::size_t l = 0; l < taylor_lambdas.size(); ++l) {
            const double t = taylor_lambdas[l];
            const double shifted = cost_prevalidated(setup, add_scaled(u, t, h), step_opts);
            remainders[k][l] = std::abs(shifted - base.cost - t * adjoint_slope);
        }
    });

    for (const auto& d : report.directions) report.max_relative_error = std::max(report.max_relative_error, d.relative_error);
    for (std::size_t l = 0; l < taylor_lambdas.size(); ++l) {
        TaylorRow row;
        row.lambda = taylor_lambdas[l];
        for (std::size_t k = 0; k < count; ++k) row.remainder = std::max(row.remainder, remainders[k][l]);
        if (l > 0 && row.remainder > 0.0) row.ratio = report.taylor.back().remainder / row.remainder;
        report.taylor.push_back(row);
    }
    return report;
}

}  // namespace ac
