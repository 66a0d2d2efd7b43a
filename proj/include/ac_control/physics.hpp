#pragma once

#include <string>
#include <string_view>

namespace ac {

enum class FluxKind { abs, hyperbola, tanh_log, arctan };
enum class ConstraintKind { c1_piecewise, yosida, hard };

std::string_view to_string(FluxKind kind) noexcept;
std::string_view to_string(ConstraintKind kind) noexcept;
/// Throws ConfigError on unknown names.
FluxKind parse_flux_kind(std::string_view name);
ConstraintKind parse_constraint_kind(std::string_view name);

/// Convex C^2 regularization f^eps of |r|.
///
///   hyperbola  sqrt(r^2 + eps^2) - eps
///   tanh_log   eps log cosh(r / eps)
///   arctan     (2 eps / pi) [s atan s - log(1 + s^2) / 2],  s = r / eps
///   abs        |r|  (eps = 0 only; limit target, never solved directly)
///
/// All built-in kinds satisfy |f'| <= 1, so the growth constant is C0 = 1.
class FluxRegularization {
public:
    /// Throws ConfigError if eps is outside [0, 1], or abs/smooth kind and eps disagree.
    FluxRegularization(FluxKind kind, double epsilon);

    FluxKind kind() const noexcept { return kind_; }
    double epsilon() const noexcept { return epsilon_; }
    bool smooth() const noexcept { return kind_ != FluxKind::abs; }
    double growth_constant() const noexcept { return 1.0; }

    double value(double r) const;
    /// Throws NondifferentiableError for the abs kind at r = 0.
    double derivative(double r) const;
    double second_derivative(double r) const;

private:
    FluxKind kind_;
    double epsilon_;
};

/// Single-valued surrogate K^delta of the subdifferential of the indicator of [-1, 1],
/// with primitive Khat^delta.
///
///   c1_piecewise  0 on [-1,1];  sign(r)(|r|-1)^2/(2 delta^2) for 1 < |r| <= 1+delta;
///                 sign(r)(|r|/delta - 1/delta - 1/2) beyond.
///   yosida        (r - clamp(r, -1, 1)) / delta
///   hard          the indicator itself (delta = 0); no pointwise K.
class ConstraintRegularization {
public:
    ConstraintRegularization(ConstraintKind kind, double delta);

    ConstraintKind kind() const noexcept { return kind_; }
    double delta() const noexcept { return delta_; }
    bool solvable() const noexcept { return kind_ != ConstraintKind::hard; }
    /// Upper bound on K' (1/delta for both smooth kinds).
    double slope_bound() const;

    /// K(r). Throws ConstraintKindError for the hard kind.
    double value(double r) const;
    /// K'(r); the yosida kind uses its right-continuous branch at +-1.
    double derivative(double r) const;
    /// Khat(r); +infinity outside [-1, 1] for the hard kind.
    double potential(double r) const;

private:
    ConstraintKind kind_;
    double delta_;
};

/// Cubic reaction g(r) = a3 r^3 + a1 r + a0 with a3 >= 0, and its primitive
/// G normalized so that min G = 0.
class Reaction {
public:
    /// Throws ConfigError when a3 < 0 or when no nonnegative primitive exists
    /// (a3 = 0, a1 <= 0 and g not identically zero).
    Reaction(double a3, double a1, double a0);

    /// g(r) = r^3 - r, G(r) = (r^2 - 1)^2 / 4.
    static Reaction double_well() { return Reaction(1.0, -1.0, 0.0); }

    double a3() const noexcept { return a3_; }
    double a1() const noexcept { return a1_; }
    double a0() const noexcept { return a0_; }
    /// C_g = max(0, -a1): g' >= -C_g everywhere.
    double semi_monotone_constant() const noexcept { return a1_ < 0.0 ? -a1_ : 0.0; }

    double value(double r) const noexcept { return (a3_ * r * r + a1_) * r + a0_; }
    double derivative(double r) const noexcept { return 3.0 * a3_ * r * r + a1_; }
    double potential(double r) const noexcept;

private:
    double raw_primitive(double r) const noexcept;

    double a3_;
    double a1_;
    double a0_;
    double offset_ = 0.0;
};

struct PhysicsParams {
    double nu = 0.5;
    double control_weight = 1.0;  // M_u
    double tracking_weight = 1.0;  // M_w
};

/// Solves f'(y) + nu^2 y = z. Lipschitz in z with constant 1/nu^2.
double resolvent(const FluxRegularization& flux, double nu, double z);

}  // namespace ac
