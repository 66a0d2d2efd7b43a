#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ac_control/control.hpp"

namespace ac {

/// Regularization levels (eps_m, delta_m), m = 1..M, non-increasing.
struct Schedule {
    std::vector<std::pair<double, double>> levels;

    /// Throws ConfigError unless entries are positive, non-increasing and >= 2^-12.
    void validate() const;
    /// (min(1, 2 eps_1), min(1, 2 delta_1)): the level one halving before the schedule, used as row 0.
    std::pair<double, double> seed_level() const;
};

/// eps_m = max(2^-m, eps_floor), delta_m = max(2^-m, delta_floor), m = 1..M. Throws ConfigError if M < 2.
Schedule default_schedule(int levels, double eps_floor = 0.0, double delta_floor = 0.0);

/// Norms of the difference of two trajectories over steps 1..n:
/// L2 and H1 summed over steps, C0 and C1 as maxima over steps.
FieldNorms trajectory_difference(const Grid& grid, const Trajectory& a, const Trajectory& b);

struct StateContinuationRow {
    int m = 0;  // 0 is the seed level
    double epsilon = 0.0;
    double delta = 0.0;
    FieldNorms difference;  // against row m-1; zero for row 0
    double cost = 0.0;
    double overshoot = 0.0;
    int newton_iterations = 0;
};

struct StateContinuationResult {
    std::vector<StateContinuationRow> rows;
    std::vector<StateTrajectory> states;
};

/// Solves the state system along seed level + schedule for fixed u and w0,
/// warm-starting each level from the previous trajectory.
StateContinuationResult run_state_continuation(const ModelSetup& setup_base, const Trajectory& u,
                                               const Schedule& schedule, const StepOptions& step_opts = {});

struct ControlContinuationRow {
    int m = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double cost = 0.0;
    double stationarity = 0.0;
    OptimizeStatus status = OptimizeStatus::converged;
    bool flagged = false;  // optimizer did not certify stationarity
    int iterations = 0;
    double control_difference = 0.0;   // |u^m - u^{m-1}|_X
    double pairing_difference = 0.0;   // max over steps and test fields of |(u^m_i - u^{m-1}_i, phi_k)_X|
    FieldNorms state_difference;
    double overshoot = 0.0;
};

struct ControlContinuationResult {
    std::vector<ControlContinuationRow> rows;
    std::vector<ModelSetup> setups;
    std::vector<Trajectory> controls;
    std::vector<GradientResult> solutions;  // state and adjoint at each row's control
};

/// The first `count` Neumann cosine modes cos(k pi (x + L) / 2L), k = 0..count-1.
std::vector<Field> cosine_test_fields(const Grid& grid, std::size_t count = 10);

/// Optimizes at seed level + each schedule level, warm-starting u from the previous optimum.
ControlContinuationResult run_control_continuation(const ModelSetup& setup_base, const Schedule& schedule,
                                                   const OptimizeOptions& opt_opts = {},
                                                   const StepOptions& step_opts = {});

struct LimitRow {
    int m = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double stationarity = 0.0;
    std::vector<double> zeta_fraction;    // per rho: share of sum |zeta coeff| on nodes with |Dw| >= rho
    double zeta_l1 = 0.0;                 // sum_i sum_j |zeta coeff|
    double zeta_riesz = 0.0;              // sqrt(sum_i |Riesz(zeta_i)|_Y^2)
    double zeta_mismatch = 0.0;           // two-form relative mismatch
    double gamma0_residual = 0.0;         // X^n norm of gamma_residual with gamma_0
    std::vector<double> gamma_rho_residual;  // per rho
    std::vector<double> defect_on_support;   // per rho: X^n norm of the adjoint defect restricted to |Dw| >= rho
    std::vector<double> reconstruction_error;  // per rho: max |zeta_functional / m + defect| on |Dw| >= rho
};

struct LimitReport {
    std::vector<double> rhos;
    std::vector<LimitRow> rows;
};

/// Nodal slope magnitude: mean of |Dw| over the adjacent edges (zero ghost edges at the ends).
Field nodal_slope(const Grid& grid, const Field& w);

LimitReport limit_diagnostics(const ControlContinuationResult& result, const std::vector<double>& rhos,
                              const GammaCutoff& gamma = GammaCutoff::rational());

}  // namespace ac
