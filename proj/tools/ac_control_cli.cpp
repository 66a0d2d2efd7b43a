// ac-control: command line driver for state solves, optimization, gradient
// checks, continuation studies and the acceptance suite.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "ac_control/io.hpp"
#include "ac_control/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { ok = 0, config_error = 1, solver_error = 2, check_failed = 3 };

struct Flags {
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    bool export_csv = false;
    std::optional<long> dirs;
    std::optional<double> lambda;
};

json check_json(const std::string& name, bool passed, const std::string& summary) {
    return {{"name", name}, {"passed", passed}, {"summary", summary}};
}

/// Writes report.json and maps the check outcomes to the exit code.
int finish(const ac::RunConfig& cfg, const std::string& command, json checks, json results) {
    bool all = true;
    for (const auto& c : checks) all = all && c.at("passed").get<bool>();
    const json report = {{"command", command}, {"passed", all}, {"config", cfg.to_json()}, {"checks", checks},
                         {"results", results}};
    const fs::path out = cfg.output_dir;
    ac::write_json(out / "report.json", report);
    for (const auto& c : checks) {
        std::cout << (c.at("passed").get<bool>() ? "PASS " : "FAIL ") << c.at("name").get<std::string>() << ": "
                  << c.at("summary").get<std::string>() << "\n";
    }
    std::cout << "report: " << (out / "report.json").string() << "\n";
    return all ? ok : check_failed;
}

json diagnostics_json(const ac::StateTrajectory& traj) {
    int newton = 0;
    int fallbacks = 0;
    int rounding = 0;
    double worst = 0.0;
    for (const auto& d : traj.diagnostics) {
        newton += d.iterations;
        fallbacks += d.gradient_fallbacks;
        rounding += d.rounding_limited ? 1 : 0;
        worst = std::max(worst, d.residual_norm);
    }
    return {{"newton_iterations", newton},
            {"gradient_fallbacks", fallbacks},
            {"rounding_limited_steps", rounding},
            {"max_residual", worst}};
}

int cmd_state(const ac::RunConfig& cfg, const Flags& flags) {
    const ac::ModelSetup setup = ac::build_validated_setup(cfg);
    const ac::Trajectory u = ac::zero_controls(setup);
    const ac::StateTrajectory traj = ac::solve_state(setup, u, cfg.solver);
    const auto ledger = ac::energy_ledger_check(setup, traj.w, u);
    const auto xi = ac::xi_bound_check(setup, traj, u);
    bool xi_ok = true;
    for (const auto& e : xi) xi_ok = xi_ok && (e.slack_linear >= 0.0 || e.slack_squared >= 0.0);
    if (flags.export_csv) {
        ac::write_file(fs::path(cfg.output_dir) / "trajectory.csv", ac::trajectory_csv(setup, traj.w, u));
        ac::write_file(fs::path(cfg.output_dir) / "ledger.csv", ac::ledger_csv(ledger));
    }
    const bool ledger_ok = ac::ledger_passed(ledger);
    json checks = json::array({check_json("energy_ledger", ledger_ok, ledger_ok ? "every step dissipates" : "slack below tolerance"),
                               check_json("xi_bound", xi_ok, xi_ok ? "a variant holds at every step" : "both variants fail")});
    json results = diagnostics_json(traj);
    results["cost"] = ac::cost(setup, traj, u);
    results["max_overshoot"] = ac::max_overshoot(traj.w);
    results["free_energy_final"] = ac::free_energy(setup, traj.w.back());
    return finish(cfg, "state", checks, results);
}

int cmd_optimize(const ac::RunConfig& cfg, const Flags& flags) {
    const ac::ModelSetup setup = ac::build_validated_setup(cfg);
    const ac::Trajectory u0 = ac::zero_controls(setup);
    const ac::OptimizeResult opt = ac::optimize(setup, u0, cfg.optimize, cfg.solver);
    if (flags.export_csv) {
        const fs::path dir = cfg.output_dir;
        const auto& st = opt.final_state.state;
        const auto& p = opt.final_state.adjoint.fields;
        const ac::Trajectory h = ac::random_direction(setup, cfg.seed);
        const ac::SensitivityTrajectory chi = ac::solve_linearization(setup, st, h);
        const ac::ZetaForms zeta = ac::compute_zeta(setup, st, p);
        const ac::Trajectory gres = ac::gamma_residual(setup, st, p, ac::GammaCutoff::rational(), 0.0);
        ac::write_file(dir / "history.csv", ac::history_csv(opt.history));
        ac::write_file(dir / "trajectory.csv", ac::trajectory_csv(setup, st.w, opt.control));
        ac::write_file(dir / "sensitivity.csv", ac::sensitivity_csv(setup, p, chi.fields, zeta.functional, gres));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < opt.history.size(); ++k) monotone = monotone && opt.history[k].cost <= opt.history[k - 1].cost;
    const bool converged = opt.status == ac::OptimizeStatus::converged;
    json checks = json::array({check_json("stationarity", converged,
                                          std::string(ac::to_string(opt.status)) + ", |M_u(p+u)| = " +
                                              ac::format_number(opt.stationarity)),
                               check_json("monotone_cost", monotone, monotone ? "cost never increased" : "cost increased")});
    json results = {{"status", std::string(ac::to_string(opt.status))},
                    {"iterations", opt.iterations},
                    {"stationarity", opt.stationarity},
                    {"cost", opt.cost}};
    return finish(cfg, "optimize", checks, results);
}

int cmd_gradcheck(ac::RunConfig cfg, const Flags& flags) {
    if (flags.dirs) cfg.fd_directions = *flags.dirs;
    if (flags.lambda) cfg.fd_lambda = *flags.lambda;
    if (cfg.fd_directions < 1 || !(cfg.fd_lambda > 0.0)) throw ac::ConfigError("--dirs must be >= 1 and --lambda > 0");
    const ac::ModelSetup setup = ac::build_validated_setup(cfg);
    const double t = cfg.taylor_lambda;
    const ac::FdReport fd =
        ac::fd_gradient_check(setup, ac::zero_controls(setup), static_cast<std::size_t>(cfg.fd_directions),
                              cfg.fd_lambda, {t, t / 2, t / 4}, cfg.seed, cfg.solver);
    json taylor = json::array();
    bool ratios_ok = true;
    for (std::size_t k = 0; k < fd.taylor.size(); ++k) {
        if (k > 0) ratios_ok = ratios_ok && fd.taylor[k].ratio >= 3.5 && fd.taylor[k].ratio <= 4.5;
        taylor.push_back({{"lambda", fd.taylor[k].lambda}, {"remainder", fd.taylor[k].remainder}, {"ratio", fd.taylor[k].ratio}});
    }
    json dirs = json::array();
    for (const auto& d : fd.directions) {
        dirs.push_back({{"adjoint_slope", d.adjoint_slope}, {"fd_slope", d.fd_slope}, {"relative_error", d.relative_error}});
    }
    const bool fd_ok = fd.max_relative_error <= 1e-5;
    json checks = json::array({check_json("fd_relative_error", fd_ok, "max " + ac::format_number(fd.max_relative_error)),
                               check_json("taylor_ratio", ratios_ok, ratios_ok ? "in [3.5, 4.5]" : "outside [3.5, 4.5]")});
    json results = {{"lambda", fd.lambda},
                    {"max_relative_error", fd.max_relative_error},
                    {"directions", dirs},
                    {"taylor", taylor},
                    {"threads", ac::probe_threads()}};
    return finish(cfg, "gradcheck", checks, results);
}

int cmd_continuation(const ac::RunConfig& cfg, const Flags& flags) {
    const ac::ModelSetup setup = ac::build_validated_setup(cfg);
    const ac::Schedule schedule = cfg.schedule();
    const ac::StateContinuationResult sc =
        ac::run_state_continuation(setup, ac::zero_controls(setup), schedule, cfg.solver);
    const ac::ControlContinuationResult cc = ac::run_control_continuation(setup, schedule, cfg.optimize, cfg.solver);
    const ac::LimitReport rep = ac::limit_diagnostics(cc, cfg.rhos);
    if (flags.export_csv) {
        ac::write_file(fs::path(cfg.output_dir) / "continuation.csv", ac::continuation_csv(cc, rep));
        ac::write_file(fs::path(cfg.output_dir) / "state_continuation.csv", ac::state_continuation_csv(sc));
    }
    double mismatch = 0.0;
    int flagged = 0;
    json rows = json::array();
    for (std::size_t m = 0; m < rep.rows.size(); ++m) {
        mismatch = std::max(mismatch, rep.rows[m].zeta_mismatch);
        flagged += cc.rows[m].flagged ? 1 : 0;
        rows.push_back({{"m", rep.rows[m].m},
                        {"epsilon", rep.rows[m].epsilon},
                        {"delta", rep.rows[m].delta},
                        {"stationarity", rep.rows[m].stationarity},
                        {"status", std::string(ac::to_string(cc.rows[m].status))},
                        {"zeta_fraction", rep.rows[m].zeta_fraction},
                        {"gamma0_residual", rep.rows[m].gamma0_residual},
                        {"gamma_rho_residual", rep.rows[m].gamma_rho_residual},
                        {"zeta_mismatch", rep.rows[m].zeta_mismatch}});
    }
    json checks = json::array({check_json("zeta_forms_agree", mismatch <= 1e-10, "max mismatch " + ac::format_number(mismatch)),
                               check_json("optimizer_certified", flagged == 0,
                                          std::to_string(flagged) + " rows without certified stationarity")});
    return finish(cfg, "continuation", checks, {{"rhos", rep.rhos}, {"rows", rows}});
}

int cmd_verify(const ac::RunConfig& cfg, const Flags&) {
    json checks = json::array();
    json details = json::array();
    for (int c = 1; c <= ac::check_count(); ++c) {
        const ac::CheckResult r = ac::run_check(cfg, c);
        checks.push_back(check_json(std::to_string(c) + "_" + r.name, r.passed, r.summary));
        details.push_back(r.to_json());
    }
    return finish(cfg, "verify", checks, {{"criteria", details}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal control toolkit for the constrained quasilinear Allen-Cahn system"};
    app.require_subcommand(1);
    Flags flags;
    const char* names[] = {"state", "optimize", "gradcheck", "continuation", "verify"};
    const char* about[] = {"Solve the state system for u = 0", "Minimize the tracking cost",
                           "Compare the adjoint gradient with finite differences",
                           "Run the (eps, delta) continuation study", "Run every acceptance check"};
    for (int k = 0; k < 5; ++k) {
        CLI::App* sub = app.add_subcommand(names[k], about[k]);
        sub->add_option("--config", flags.config, "Config file (key = value, or a previous report.json)")->required();
        sub->add_option("--out", flags.out, "Output directory (overrides [output] dir)");
        sub->add_option("--seed", flags.seed, "Random seed (overrides [output] seed)");
        sub->add_flag("--export", flags.export_csv, "Write CSV artifacts");
        if (std::string(names[k]) == "gradcheck") {
            sub->add_option("--dirs", flags.dirs, "Number of random directions");
            sub->add_option("--lambda", flags.lambda, "Central-difference step");
        }
    }
    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        ac::RunConfig cfg = ac::parse_config(flags.config);
        if (flags.out) cfg.output_dir = *flags.out;
        if (flags.seed) cfg.seed = *flags.seed;
        if (command == "state") return cmd_state(cfg, flags);
        if (command == "optimize") return cmd_optimize(cfg, flags);
        if (command == "gradcheck") return cmd_gradcheck(cfg, flags);
        if (command == "continuation") return cmd_continuation(cfg, flags);
        return cmd_verify(cfg, flags);
    } catch (const ac::AssumptionError& e) {
        std::cerr << "error: assumption (" << e.assumption() << ") failed: " << e.what() << "\n";
        return config_error;
    } catch (const ac::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return config_error;
    } catch (const ac::NonconvergenceError& e) {
        std::cerr << "solver failure at step " << e.step() << ": " << e.what() << "\n";
        return solver_error;
    } catch (const ac::Error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return solver_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return solver_error;
    }
}
