#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ac_control/limits.hpp"

namespace ac {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
/// format_number, with ".0" appended when the text would otherwise read as an integer.
std::string format_float(double v);

/// Writes `content` to `path`, creating parent directories. Throws Error on I/O failure.
void write_file(const std::filesystem::path& path, const std::string& content);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// `i,j,x,w,u,xi,flux,dwdx`, one row per (step, node), steps 0..n. Row i = 0 has u = 0;
/// flux = f'(Dw) + nu^2 Dw and dwdx = Dw are averaged from edges to nodes.
std::string trajectory_csv(const ModelSetup& setup, const Trajectory& w, const Trajectory& u);

/// `i,kinetic,free_energy,rhs,slack`.
std::string ledger_csv(const std::vector<LedgerEntry>& ledger);

/// `i,j,x,p,chi,zeta_coeff,gamma_residual` for steps 1..n.
std::string sensitivity_csv(const ModelSetup& setup, const Trajectory& p, const Trajectory& chi,
                            const std::vector<DualField>& zeta, const Trajectory& gamma_res);

/// `k,J,grad_norm,step,evals`.
std::string history_csv(const std::vector<OptimizeRecord>& history);

/// `m,eps,delta,dL2,dH1,dC0,dC1,cost,overshoot,zeta_frac_rho_<rho>...,gamma_res,stationarity`,
/// with the differences taken between consecutive optimal states.
std::string continuation_csv(const ControlContinuationResult& result, const LimitReport& limits);

/// `m,eps,delta,dL2,dH1,dC0,dC1,cost,overshoot,newton` for a fixed-control continuation.
std::string state_continuation_csv(const StateContinuationResult& result);

}  // namespace ac
