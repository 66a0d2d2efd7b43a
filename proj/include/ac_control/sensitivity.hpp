#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "ac_control/state.hpp"

namespace ac {

/// A_i = (1/tau) M + S(f''(Dw_i) + nu^2) + M diag(g'(w_i) + K'(w_i)).
/// Symmetric; the same matrix drives the linearized and the adjoint recursion.
struct StepOperator {
    std::size_t step = 0;
    TridiagonalSystem matrix;
};

struct SensitivityTrajectory {
    Trajectory fields;                   // chi_1..chi_n or p_1..p_n, at [i-1]
    Trajectory forcing;                  // h_i or v_i, at [i-1]
    std::vector<double> solve_residuals;  // relative linear-solve residual per step
};

/// Throws AssumptionError if tau >= tau*, PreconditionError for nonsmooth kinds.
StepOperator assemble_step_operator(const ModelSetup& setup, const Field& w_star, std::size_t step = 0);
std::vector<StepOperator> assemble_step_operators(const ModelSetup& setup, const StateTrajectory& traj);

/// chi_0 = 0;  A_i chi_i = M (M_u h_i) + (1/tau) M chi_{i-1},  i = 1..n.
SensitivityTrajectory solve_linearization(const ModelSetup& setup, const StateTrajectory& traj,
                                          const Trajectory& direction);
SensitivityTrajectory solve_linearization(const ModelSetup& setup, const std::vector<StepOperator>& ops,
                                          const Trajectory& direction);

/// p_{n+1} = 0;  A_i p_i = M v_i + (1/tau) M p_{i+1},  i = n..1.
SensitivityTrajectory solve_adjoint(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& forcing);
SensitivityTrajectory solve_adjoint(const ModelSetup& setup, const std::vector<StepOperator>& ops,
                                    const Trajectory& forcing);

/// v_i = M_w (w_i - w^ad_i): the adjoint forcing of the tracking cost.
Trajectory tracking_forcing(const ModelSetup& setup, const StateTrajectory& traj);

/// |sum_i (p_i, M_u h_i)_X - sum_i (v_i, chi_i)_X|.
double duality_gap(const ModelSetup& setup, const Trajectory& p, const Trajectory& direction, const Trajectory& forcing,
                   const Trajectory& chi);
/// 1 + |p||h| + |v||chi|, the magnitude the gap is measured against.
double duality_scale(const ModelSetup& setup, const Trajectory& p, const Trajectory& direction,
                     const Trajectory& forcing, const Trajectory& chi);

/// The limiting multiplier candidate zeta_i, computed two independent ways.
///
/// functional:  <zeta_i, phi> = h sum_e f''(Dw_i) Dp_i Dphi + (K'(w_i) p_i, phi)_X
/// defect:      <zeta_i, phi> = (v_i - (p_i - p_{i+1})/tau - g'(w_i) p_i, phi)_X - nu^2 h sum_e Dp_i Dphi
struct ZetaForms {
    std::vector<DualField> functional;
    std::vector<DualField> defect;
    /// max_i |functional_i - defect_i|_inf / (1 + max_i |functional_i|_inf)
    double relative_mismatch = 0.0;
};

ZetaForms compute_zeta(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& p);

/// Cutoff gamma_0 with gamma_0(0) = gamma_0'(0) = 0, and its rho-shifted hinge gamma_rho.
class GammaCutoff {
public:
    /// Throws ConfigError unless gamma(0) = 0 and gamma'(0) = 0 (checked numerically).
    explicit GammaCutoff(std::function<double(double)> gamma0);
    /// gamma_0(r) = r^2 / (1 + r^2).
    static GammaCutoff rational();

    double base(double r) const { return gamma0_(r); }
    /// gamma_0(r - rho) for r >= rho, gamma_0(r + rho) for r <= -rho, 0 in between; rho = 0 is gamma_0.
    double operator()(double r, double rho) const;

private:
    std::function<double(double)> gamma0_;
};

/// gamma(Dw_i) [(p_i - p_{i+1})/tau - nu^2 D^2 p_i + g'(w_i) p_i - M_w (w_i - w^ad_i)] at the nodes,
/// with gamma averaged from the two adjacent edges. One field per step, [i-1].
Trajectory gamma_residual(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& p,
                          const GammaCutoff& gamma, double rho);

/// The adjoint defect (p_i - p_{i+1})/tau - nu^2 D^2 p_i + g'(w_i) p_i - M_w (w_i - w^ad_i) at the nodes.
Trajectory adjoint_defect(const ModelSetup& setup, const StateTrajectory& traj, const Trajectory& p);

}  // namespace ac
