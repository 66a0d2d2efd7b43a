#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ac_control/verify.hpp"

namespace py = pybind11;

namespace {

py::array_t<double> to_array(const ac::Trajectory& t) {
    const std::size_t rows = t.size();
    const std::size_t cols = rows ? t.front().size() : 0;
    py::array_t<double> out({rows, cols});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) v(i, j) = t[i][j];
    }
    return out;
}

py::array_t<double> to_array(const ac::Field& f) {
    py::array_t<double> out(static_cast<py::ssize_t>(f.size()));
    std::copy(f.begin(), f.end(), out.mutable_data());
    return out;
}

/// (n, J+1) array, or zero controls when None.
ac::Trajectory controls_from(const ac::ModelSetup& setup, const py::object& controls) {
    if (controls.is_none()) return ac::zero_controls(setup);
    const auto a = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(controls);
    if (!a || a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != setup.steps ||
        static_cast<std::size_t>(a.shape(1)) != setup.grid.node_count()) {
        throw ac::GridMismatchError("controls must be an array of shape (n, J+1)");
    }
    const auto v = a.unchecked<2>();
    ac::Trajectory u(setup.steps, ac::Field(setup.grid.node_count()));
    for (std::size_t i = 0; i < setup.steps; ++i) {
        for (std::size_t j = 0; j < setup.grid.node_count(); ++j) u[i][j] = v(i, j);
    }
    return u;
}

py::dict history_dict(const std::vector<ac::OptimizeRecord>& history) {
    py::list k, cost, grad, step, evals;
    for (const auto& h : history) {
        k.append(h.iteration);
        cost.append(h.cost);
        grad.append(h.grad_norm);
        step.append(h.step);
        evals.append(h.evaluations);
    }
    py::dict d;
    d["k"] = k;
    d["J"] = cost;
    d["grad_norm"] = grad;
    d["step"] = step;
    d["evals"] = evals;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Compiled core of ac_control: state solves, adjoint gradients, optimization and checks.";

    static py::exception<ac::ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
    static py::exception<ac::AssumptionError> assumption_error(m, "AssumptionError", config_error.ptr());
    static py::exception<ac::Error> solver_error(m, "SolverError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ac::AssumptionError& e) {
            PyErr_SetString(assumption_error.ptr(), e.what());
        } catch (const ac::ConfigError& e) {
            PyErr_SetString(config_error.ptr(), e.what());
        } catch (const ac::Error& e) {
            PyErr_SetString(solver_error.ptr(), e.what());
        }
    });

    py::class_<ac::RunConfig>(m, "Config")
        .def(py::init<>())
        .def_static("from_text", [](const std::string& text) { return ac::parse_config_text(text); }, py::arg("text"))
        .def_static("from_file", [](const std::string& path) { return ac::parse_config(path); }, py::arg("path"))
        .def("to_text", &ac::RunConfig::to_text)
        .def("to_json", [](const ac::RunConfig& c) { return c.to_json().dump(); })
        .def_readwrite("seed", &ac::RunConfig::seed)
        .def_readwrite("output_dir", &ac::RunConfig::output_dir)
        .def_readwrite("epsilon", &ac::RunConfig::epsilon)
        .def_readwrite("delta", &ac::RunConfig::delta)
        .def_readwrite("steps", &ac::RunConfig::steps)
        .def_readwrite("cells", &ac::RunConfig::cells)
        .def("validate", [](const ac::RunConfig& c) { ac::build_validated_setup(c); });

    m.def(
        "nodes",
        [](const ac::RunConfig& c) {
            const ac::Grid grid = ac::build_setup(c).grid;
            ac::Field x(grid.node_count());
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = grid.node(j);
            return to_array(x);
        },
        py::arg("config"), "Grid nodes x_0..x_J.");

    m.def(
        "solve_state",
        [](const ac::RunConfig& c, const py::object& controls) {
            const ac::ModelSetup setup = ac::build_validated_setup(c);
            const ac::Trajectory u = controls_from(setup, controls);
            const ac::StateTrajectory traj = ac::solve_state(setup, u, c.solver);
            const auto ledger = ac::energy_ledger_check(setup, traj.w, u);
            py::list iters;
            for (const auto& d : traj.diagnostics) iters.append(d.iterations);
            py::dict out;
            out["w"] = to_array(traj.w);
            out["xi"] = to_array(traj.xi);
            out["cost"] = ac::cost(setup, traj, u);
            out["ledger_passed"] = ac::ledger_passed(ledger);
            out["newton_iterations"] = iters;
            return out;
        },
        py::arg("config"), py::arg("controls") = py::none(),
        "Solves the state system; controls default to zero. Returns w with shape (n+1, J+1).");

    m.def(
        "gradient",
        [](const ac::RunConfig& c, const py::object& controls) {
            const ac::ModelSetup setup = ac::build_validated_setup(c);
            const ac::GradientResult g = ac::gradient(setup, controls_from(setup, controls), c.solver);
            return py::make_tuple(g.cost, to_array(g.gradient), to_array(g.adjoint.fields));
        },
        py::arg("config"), py::arg("controls") = py::none(), "Returns (cost, gradient, adjoint p).");

    m.def(
        "optimize",
        [](const ac::RunConfig& c) {
            const ac::ModelSetup setup = ac::build_validated_setup(c);
            const ac::OptimizeResult r = ac::optimize(setup, ac::zero_controls(setup), c.optimize, c.solver);
            py::dict out;
            out["status"] = std::string(ac::to_string(r.status));
            out["iterations"] = r.iterations;
            out["stationarity"] = r.stationarity;
            out["cost"] = r.cost;
            out["control"] = to_array(r.control);
            out["history"] = history_dict(r.history);
            return out;
        },
        py::arg("config"), "Descent from u = 0 with the configured options.");

    m.def(
        "gradcheck",
        [](const ac::RunConfig& c, long dirs, double lam) {
            const ac::ModelSetup setup = ac::build_validated_setup(c);
            const double t = c.taylor_lambda;
            const ac::FdReport r = ac::fd_gradient_check(setup, ac::zero_controls(setup), static_cast<std::size_t>(dirs),
                                                         lam, {t, t / 2, t / 4}, c.seed, c.solver);
            py::list ratios;
            for (std::size_t k = 1; k < r.taylor.size(); ++k) ratios.append(r.taylor[k].ratio);
            py::dict out;
            out["max_relative_error"] = r.max_relative_error;
            out["taylor_ratios"] = ratios;
            return out;
        },
        py::arg("config"), py::arg("dirs") = 5, py::arg("lam") = 1e-5);

    m.def("check_count", &ac::check_count);
    m.def("check_name", &ac::check_name, py::arg("criterion"));
    m.def(
        "run_check", [](const ac::RunConfig& c, int criterion) { return ac::run_check(c, criterion).to_json().dump(); },
        py::arg("config"), py::arg("criterion"), "JSON text of one acceptance check.");
}
