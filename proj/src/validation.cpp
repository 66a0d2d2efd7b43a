#include <algorithm>
#include <cmath>
#include <sstream>

#include "ac_control/model.hpp"

namespace ac {

ModelSetup ModelSetup::with_regularization(double epsilon, double delta) const {
    ModelSetup copy = *this;
    copy.flux = FluxRegularization(flux.kind(), epsilon);
    copy.constraint = ConstraintRegularization(constraint.kind(), delta);
    return copy;
}

bool ValidationReport::ok() const noexcept { return first_failure() == nullptr; }

const AssumptionCheck* ValidationReport::first_failure() const noexcept {
    for (const auto& c : checks) {
        if (!c.passed) return &c;
    }
    return nullptr;
}

namespace {

bool all_finite(const Field& f) {
    return std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); });
}

AssumptionCheck check_flux(const FluxRegularization& flux) {
    AssumptionCheck c{"A2", true, ""};
    if (!flux.smooth()) {
        c.detail = "abs kind: limit target f0(r) = |r|, reachable only by continuation";
        return c;
    }
    std::ostringstream why;
    const double c0 = flux.growth_constant();
    if (flux.value(0.0) != 0.0) {
        c.passed = false;
        why << "f(0) = " << flux.value(0.0) << " != 0; ";
    }
    constexpr int kSamples = 4001;
    for (int k = 0; k < kSamples; ++k) {
        const double r = -50.0 + 100.0 * k / (kSamples - 1);
        if (flux.value(r) < 0.0) {
            c.passed = false;
            why << "f(" << r << ") < 0; ";
            break;
        }
        if (flux.second_derivative(r) < 0.0) {
            c.passed = false;
            why << "f''(" << r << ") < 0; ";
            break;
        }
        if (std::abs(flux.derivative(r)) > c0 * (1.0 + std::abs(r))) {
            c.passed = false;
            why << "|f'(" << r << ")| exceeds C0 (1 + |r|); ";
            break;
        }
    }
    // f'' -> 0 uniformly on {|r| >= lambda}. Only the limit is assumed: a single halving may
    // raise the sup while epsilon is still above lambda, so that case is recorded, not failed.
    auto sup_beyond = [](const FluxRegularization& f, double lambda) {
        double sup = 0.0;
        for (int k = 0; k < 2001; ++k) sup = std::max(sup, f.second_derivative(lambda + 50.0 * k / 2000.0));
        return sup;
    };
    const FluxRegularization half(flux.kind(), 0.5 * flux.epsilon());
    const FluxRegularization far(flux.kind(), flux.epsilon() / 1024.0);
    std::ostringstream notes;
    for (double lambda : {0.5, 1.0, 2.0}) {
        const double sup_here = sup_beyond(flux, lambda);
        if (!(sup_beyond(far, lambda) < sup_here)) {
            c.passed = false;
            why << "sup f'' on |r| >= " << lambda << " does not decay as epsilon -> 0; ";
        } else if (!(sup_beyond(half, lambda) < sup_here)) {
            notes << " (sup f'' on |r| >= " << lambda << " rises on the next halving)";
        }
    }
    c.detail = c.passed ? "C0 = 1; f(0) = 0, f >= 0, f'' >= 0, growth and f'' decay sampled" + notes.str() : why.str();
    return c;
}

AssumptionCheck check_reaction(const Reaction& g) {
    AssumptionCheck c{"A3", true, ""};
    const double cg = g.semi_monotone_constant();
    double min_g = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 2000; ++k) {
        const double r = -5.0 + 10.0 * k / 2000.0;
        if (g.derivative(r) < -cg - 1e-12) {
            c.passed = false;
            c.detail = "g' < -C_g at r = " + std::to_string(r);
            return c;
        }
        min_g = std::min(min_g, g.potential(r));
    }
    if (min_g < -1e-12) {
        c.passed = false;
        c.detail = "primitive G takes negative values";
        return c;
    }
    c.detail = "C_g = " + std::to_string(cg);
    return c;
}

AssumptionCheck check_constraint(const ConstraintRegularization& k, std::vector<std::string>& warnings) {
    AssumptionCheck c{"A4", true, ""};
    if (!k.solvable()) {
        c.detail = "hard kind: indicator of [-1, 1], reachable only by continuation";
        return c;
    }
    if (k.kind() == ConstraintKind::yosida) {
        warnings.emplace_back("yosida constraint is only Lipschitz: K is not C^1 at r = +-1");
    }
    const double bound = k.slope_bound();
    for (int s = 0; s <= 4000; ++s) {
        const double r = -5.0 + 10.0 * s / 4000.0;
        const double v = k.value(r);
        const double dv = k.derivative(r);
        if (v * r < 0.0 || (std::abs(r) <= 1.0 && v != 0.0) || dv < 0.0 || dv > bound + 1e-9) {
            c.passed = false;
            c.detail = "K property violated at r = " + std::to_string(r);
            return c;
        }
    }
    c.detail = "C_K = " + std::to_string(bound);
    return c;
}

}  // namespace

ValidationReport validate_assumptions(const ModelSetup& setup) {
    ValidationReport report;
    const double cg = setup.reaction.semi_monotone_constant();
    report.semi_monotone_constant = cg;
    report.tau_star = 1.0 / (8.0 * (cg + 1.0));
    report.growth_constant = setup.flux.growth_constant();

    {
        AssumptionCheck a1{"A1", true, ""};
        const auto& p = setup.physics;
        if (!(p.nu > 0.0) || !std::isfinite(p.nu)) {
            a1.passed = false;
            a1.detail = "nu must be positive";
        } else if (!(p.control_weight >= 0.0) || !(p.tracking_weight >= 0.0)) {
            a1.passed = false;
            a1.detail = "M_u and M_w must be nonnegative";
        } else {
            a1.detail = "nu = " + std::to_string(p.nu);
        }
        report.checks.push_back(a1);
    }
    report.checks.push_back(check_flux(setup.flux));
    report.checks.push_back(check_reaction(setup.reaction));
    report.checks.push_back(check_constraint(setup.constraint, report.warnings));
    {
        AssumptionCheck a5{"A5", true, ""};
        if (!(setup.horizon > 0.0)) {
            a5.passed = false;
            a5.detail = "horizon T must be positive";
        } else if (setup.steps > 0) {
            const double tau = setup.tau();
            std::ostringstream os;
            os << "tau = " << tau << (tau < report.tau_star ? " < " : " >= ") << "tau* = " << report.tau_star;
            a5.passed = tau < report.tau_star;
            a5.detail = os.str();
        } else {
            a5.detail = "n = 0: no time steps";
        }
        report.checks.push_back(a5);
    }
    {
        AssumptionCheck a6{"A6", true, ""};
        if (setup.target.size() != setup.steps) {
            a6.passed = false;
            a6.detail = "target trajectory needs n = " + std::to_string(setup.steps) + " fields";
        } else {
            for (const Field& f : setup.target) {
                if (f.size() != setup.grid.node_count() || !all_finite(f)) {
                    a6.passed = false;
                    a6.detail = "target field has wrong length or non-finite values";
                    break;
                }
            }
        }
        report.checks.push_back(a6);
    }
    {
        AssumptionCheck w0{"w0", true, ""};
        if (setup.initial.size() != setup.grid.node_count() || !all_finite(setup.initial)) {
            w0.passed = false;
            w0.detail = "initial field has wrong length or non-finite values";
        } else {
            for (double v : setup.initial) {
                if (!std::isfinite(setup.constraint.potential(v))) {
                    w0.passed = false;
                    w0.detail = "Khat(w0) is not finite: |w0| > 1 with the hard constraint";
                    break;
                }
            }
        }
        report.checks.push_back(w0);
    }
    return report;
}

void require_valid(const ModelSetup& setup) {
    const ValidationReport report = validate_assumptions(setup);
    if (const AssumptionCheck* bad = report.first_failure()) {
        throw AssumptionError(bad->id, "assumption (" + bad->id + ") violated: " + bad->detail);
    }
}

}  // namespace ac
