#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ac_control/sensitivity.hpp"

namespace ac {

enum class StepRule { armijo_backtracking, barzilai_borwein_safeguarded };

std::string_view to_string(StepRule rule) noexcept;
StepRule parse_step_rule(std::string_view name);

struct OptimizeOptions {
    int max_iters = 500;
    double tolerance = 1e-6;  // on |M_u (p + u)|_X, relative to 1 + |u0|_X
    StepRule step_rule = StepRule::barzilai_borwein_safeguarded;
    double initial_step = 1.0;
    double armijo_slope = 1e-4;
    int max_backtracks = 60;

    void validate() const;
};

/// (M_w/2) sum_i |w_i - w^ad_i|_X^2 + (M_u/2) sum_i |u_i|_X^2.
double cost(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& u);

struct GradientResult {
    Trajectory gradient;  // M_u (p_i + u_i), at [i-1]
    double cost = 0.0;
    StateTrajectory state;
    SensitivityTrajectory adjoint;
};

/// State solve, adjoint solve with v = M_w (w - w^ad), gradient M_u (p + u).
GradientResult gradient(const ModelSetup& setup, const Trajectory& u, const StepOptions& step_opts = {});

enum class OptimizeStatus { converged, max_iterations, stalled };
std::string_view to_string(OptimizeStatus status) noexcept;

struct OptimizeRecord {
    int iteration = 0;
    double cost = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;       // accepted step length (0 for the initial record)
    long evaluations = 0;    // cumulative state solves (each gradient also costs one adjoint)
};

struct OptimizeResult {
    Trajectory control;
    OptimizeStatus status = OptimizeStatus::max_iterations;
    int iterations = 0;
    double stationarity = 0.0;  // |M_u (p + u)|_X at the returned control
    double cost = 0.0;
    std::vector<OptimizeRecord> history;
    GradientResult final_state;
};

/// First-order descent in the X inner product with monotone Armijo backtracking.
OptimizeResult optimize(const ModelSetup& setup, const Trajectory& u0, const OptimizeOptions& opts = {},
                        const StepOptions& step_opts = {});

struct FdDirectionResult {
    double adjoint_slope = 0.0;  // (grad, h)_X
    double fd_slope = 0.0;       // central difference at the first lambda
    double relative_error = 0.0;
};

struct TaylorRow {
    double lambda = 0.0;
    double remainder = 0.0;  // |J(u + lambda h) - J(u) - lambda (grad, h)|, max over directions
    double ratio = 0.0;      // remainder(previous lambda) / remainder(this lambda); 0 for the first row
};

struct FdReport {
    double lambda = 0.0;  // central-difference step
    std::vector<FdDirectionResult> directions;
    std::vector<TaylorRow> taylor;
    double max_relative_error = 0.0;
    double base_cost = 0.0;
};

/// Compares the adjoint gradient with central differences of step `lambda` along
/// `count` random unit directions (direction k seeded with seed + k). The Taylor
/// table records first-order remainders at each of `taylor_lambdas`; halving the
/// lambda should divide the remainder by about 4. `threads` caps concurrent probes (0 = auto).
FdReport fd_gradient_check(const ModelSetup& setup, const Trajectory& u, std::size_t count, double lambda,
                           const std::vector<double>& taylor_lambdas, std::uint64_t seed,
                           const StepOptions& step_opts = {}, unsigned threads = 0);

/// Unit-norm (in X^n) random trajectory from a seeded generator.
Trajectory random_direction(const ModelSetup& setup, std::uint64_t seed);

/// AC_CONTROL_THREADS, or hardware concurrency when unset or 0.
unsigned probe_threads(unsigned requested = 0);

}  // namespace ac
