#include "ac_control/io.hpp"

#include <array>
#include <charconv>
#include <fstream>

namespace ac {

std::string format_number(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw Error("format_number: conversion failed");
    return std::string(buf.data(), ptr);
}

std::string format_float(double v) {
    std::string s = format_number(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

namespace {

void row(std::string& out, std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    out += '\n';
}

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }

}  // namespace

std::string trajectory_csv(const ModelSetup& setup, const Trajectory& w, const Trajectory& u) {
    if (w.size() != setup.steps + 1 || u.size() != setup.steps) {
        throw PreconditionError("trajectory_csv: expected n+1 states and n controls");
    }
    const Grid& grid = setup.grid;
    const double nu2 = setup.physics.nu * setup.physics.nu;
    std::string out = "i,j,x,w,u,xi,flux,dwdx\n";
    for (std::size_t i = 0; i <= setup.steps; ++i) {
        const EdgeField dw = forward_diff(grid, w[i]);
        EdgeField q(dw.size());
        for (std::size_t e = 0; e < dw.size(); ++e) q[e] = setup.flux.derivative(dw[e]) + nu2 * dw[e];
        const Field flux = edge_to_node(grid, q);
        const Field slope = edge_to_node(grid, dw);
        for (std::size_t j = 0; j < grid.node_count(); ++j) {
            const double uij = i == 0 ? 0.0 : u[i - 1][j];
            row(out, {num(i), num(j), num(grid.node(j)), num(w[i][j]), num(uij),
                      num(setup.constraint.value(w[i][j])), num(flux[j]), num(slope[j])});
        }
    }
    return out;
}

std::string ledger_csv(const std::vector<LedgerEntry>& ledger) {
    std::string out = "i,kinetic,free_energy,rhs,slack\n";
    for (const auto& e : ledger) row(out, {num(e.step), num(e.kinetic), num(e.free_energy), num(e.rhs), num(e.slack)});
    return out;
}

std::string sensitivity_csv(const ModelSetup& setup, const Trajectory& p, const Trajectory& chi,
                            const std::vector<DualField>& zeta, const Trajectory& gamma_res) {
    const std::size_t n = setup.steps;
    if (p.size() != n || chi.size() != n || zeta.size() != n || gamma_res.size() != n) {
        throw PreconditionError("sensitivity_csv: expected n fields of each kind");
    }
    const Grid& grid = setup.grid;
    std::string out = "i,j,x,p,chi,zeta_coeff,gamma_residual\n";
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 0; j < grid.node_count(); ++j) {
            row(out, {num(i), num(j), num(grid.node(j)), num(p[i - 1][j]), num(chi[i - 1][j]), num(zeta[i - 1][j]),
                      num(gamma_res[i - 1][j])});
        }
    }
    return out;
}

std::string history_csv(const std::vector<OptimizeRecord>& history) {
    std::string out = "k,J,grad_norm,step,evals\n";
    for (const auto& h : history) {
        row(out, {std::to_string(h.iteration), num(h.cost), num(h.grad_norm), num(h.step), std::to_string(h.evaluations)});
    }
    return out;
}

std::string continuation_csv(const ControlContinuationResult& result, const LimitReport& limits) {
    if (limits.rows.size() != result.rows.size()) throw PreconditionError("continuation_csv: row count mismatch");
    std::string out = "m,eps,delta,dL2,dH1,dC0,dC1,cost,overshoot";
    for (double rho : limits.rhos) out += ",zeta_frac_rho_" + format_number(rho);
    out += ",gamma_res,stationarity\n";
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        const auto& r = result.rows[k];
        const auto& l = limits.rows[k];
        out += std::to_string(r.m) + "," + num(r.epsilon) + "," + num(r.delta) + "," + num(r.state_difference.l2) + "," +
               num(r.state_difference.h1) + "," + num(r.state_difference.c0) + "," + num(r.state_difference.c1) + "," +
               num(r.cost) + "," + num(r.overshoot);
        for (double f : l.zeta_fraction) out += "," + num(f);
        out += "," + num(l.gamma0_residual) + "," + num(r.stationarity) + "\n";
    }
    return out;
}

std::string state_continuation_csv(const StateContinuationResult& result) {
    std::string out = "m,eps,delta,dL2,dH1,dC0,dC1,cost,overshoot,newton\n";
    for (const auto& r : result.rows) {
        row(out, {std::to_string(r.m), num(r.epsilon), num(r.delta), num(r.difference.l2), num(r.difference.h1),
                  num(r.difference.c0), num(r.difference.c1), num(r.cost), num(r.overshoot),
                  std::to_string(r.newton_iterations)});
    }
    return out;
}

}  // namespace ac
