#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ac_control/mesh.hpp"
#include "ac_control/physics.hpp"

namespace ac {

/// One fully specified problem instance: grid, physics, regularizations,
/// horizon, initial field and target trajectory.
struct ModelSetup {
    Grid grid;
    PhysicsParams physics;
    FluxRegularization flux;
    ConstraintRegularization constraint;
    Reaction reaction;
    double horizon = 1.0;
    std::size_t steps = 0;
    Field initial;
    Trajectory target;  // target[i-1] is w^ad at step i

    double tau() const noexcept { return horizon / static_cast<double>(steps); }
    /// Copy with the regularization parameters replaced (same kinds).
    ModelSetup with_regularization(double epsilon, double delta) const;
};

struct AssumptionCheck {
    std::string id;  // "A1" .. "A6", or "w0"
    bool passed = true;
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    double semi_monotone_constant = 0.0;  // C_g
    double tau_star = 0.0;                 // 1 / (8 (C_g + 1))
    double growth_constant = 1.0;          // C0
    std::vector<std::string> warnings;

    bool ok() const noexcept;
    /// First failing check, "" when ok().
    const AssumptionCheck* first_failure() const noexcept;
};

/// Checks (A1)-(A6) and admissibility of w0. Reporting only: never throws.
ValidationReport validate_assumptions(const ModelSetup& setup);

/// Throws AssumptionError naming the first failed assumption.
void require_valid(const ModelSetup& setup);

}  // namespace ac
