#include "ac_control/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "ac_control/errors.hpp"

namespace ac {

std::string_view to_string(FluxKind kind) noexcept {
    switch (kind) {
        case FluxKind::abs: return "abs";
        case FluxKind::hyperbola: return "hyperbola";
        case FluxKind::tanh_log: return "tanh_log";
        case FluxKind::arctan: return "arctan";
    }
    return "?";
}

std::string_view to_string(ConstraintKind kind) noexcept {
    switch (kind) {
        case ConstraintKind::c1_piecewise: return "c1_piecewise";
        case ConstraintKind::yosida: return "yosida";
        case ConstraintKind::hard: return "hard";
    }
    return "?";
}

FluxKind parse_flux_kind(std::string_view name) {
    for (FluxKind k : {FluxKind::abs, FluxKind::hyperbola, FluxKind::tanh_log, FluxKind::arctan}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown flux kind '" + std::string(name) + "' (abs, hyperbola, tanh_log, arctan)");
}

ConstraintKind parse_constraint_kind(std::string_view name) {
    for (ConstraintKind k : {ConstraintKind::c1_piecewise, ConstraintKind::yosida, ConstraintKind::hard}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("unknown constraint kind '" + std::string(name) + "' (c1_piecewise, yosida, hard)");
}

// ---------------------------------------------------------------------------
// Flux regularization

FluxRegularization::FluxRegularization(FluxKind kind, double epsilon) : kind_(kind), epsilon_(epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw ConfigError("flux regularization epsilon must lie in [0, 1], got " + std::to_string(epsilon));
    }
    if (kind == FluxKind::abs && epsilon != 0.0) throw ConfigError("flux kind 'abs' requires epsilon = 0");
    if (kind != FluxKind::abs && epsilon == 0.0) {
        throw ConfigError("flux kind '" + std::string(to_string(kind)) + "' requires epsilon > 0");
    }
}

double FluxRegularization::value(double r) const {
    const double eps = epsilon_;
    switch (kind_) {
        case FluxKind::abs: return std::abs(r);
        case FluxKind::hyperbola: {
            // sqrt(r^2+eps^2) - eps without cancellation for small |r|.
            const double root = std::hypot(r, eps);
            return r * r / (root + eps);
        }
        case FluxKind::tanh_log: {
            const double x = std::abs(r) / eps;
            if (x < 20.0) {
                const double sh = std::sinh(0.5 * x);
                return eps * std::log1p(2.0 * sh * sh);  // cosh x - 1 = 2 sinh^2(x/2)
            }
            return std::abs(r) + eps * (std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2);
        }
        case FluxKind::arctan: {
            const double s = r / eps;
            return 2.0 * eps / std::numbers::pi * (s * std::atan(s) - 0.5 * std::log1p(s * s));
        }
    }
    return 0.0;
}

double FluxRegularization::derivative(double r) const {
    const double eps = epsilon_;
    switch (kind_) {
        case FluxKind::abs:
            if (r == 0.0) throw NondifferentiableError("|r| is not differentiable at r = 0");
            return r > 0.0 ? 1.0 : -1.0;
        case FluxKind::hyperbola: return r / std::hypot(r, eps);
        case FluxKind::tanh_log: return std::tanh(r / eps);
        case FluxKind::arctan: return 2.0 / std::numbers::pi * std::atan(r / eps);
    }
    return 0.0;
}

double FluxRegularization::second_derivative(double r) const {
    const double eps = epsilon_;
    switch (kind_) {
        case FluxKind::abs:
            if (r == 0.0) throw NondifferentiableError("|r| has no second derivative at r = 0");
            return 0.0;
        case FluxKind::hyperbola: {
            const double root = std::hypot(r, eps);
            return eps * eps / (root * root * root);
        }
        case FluxKind::tanh_log: {
            // sech^2(x)/eps = 4 e^{-2|x|} / (1 + e^{-2|x|})^2 / eps
            const double t = std::exp(-2.0 * std::abs(r) / eps);
            return 4.0 * t / ((1.0 + t) * (1.0 + t)) / eps;
        }
        case FluxKind::arctan: {
            const double s = r / eps;
            return 2.0 / (std::numbers::pi * eps * (1.0 + s * s));
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Constraint regularization

ConstraintRegularization::ConstraintRegularization(ConstraintKind kind, double delta)
    : kind_(kind), delta_(delta) {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw ConfigError("constraint regularization delta must lie in [0, 1], got " + std::to_string(delta));
    }
    if (kind == ConstraintKind::hard && delta != 0.0) throw ConfigError("constraint kind 'hard' requires delta = 0");
    if (kind != ConstraintKind::hard && delta == 0.0) {
        throw ConfigError("constraint kind '" + std::string(to_string(kind)) + "' requires delta > 0");
    }
}

double ConstraintRegularization::slope_bound() const {
    if (kind_ == ConstraintKind::hard) return std::numeric_limits<double>::infinity();
    return 1.0 / delta_;
}

double ConstraintRegularization::value(double r) const {
    const double d = delta_;
    const double a = std::abs(r);
    const double sign = r < 0.0 ? -1.0 : 1.0;
    switch (kind_) {
        case ConstraintKind::hard:
            throw ConstraintKindError("the hard constraint has no pointwise K; reach it by continuation");
        case ConstraintKind::c1_piecewise:
            if (a <= 1.0) return 0.0;
            if (a <= 1.0 + d) return sign * (a - 1.0) * (a - 1.0) / (2.0 * d * d);
            return sign * ((a - 1.0) / d - 0.5);
        case ConstraintKind::yosida:
            return (r - std::clamp(r, -1.0, 1.0)) / d;
    }
    return 0.0;
}

double ConstraintRegularization::derivative(double r) const {
    const double d = delta_;
    const double a = std::abs(r);
    switch (kind_) {
        case ConstraintKind::hard:
            throw ConstraintKindError("the hard constraint has no pointwise K'");
        case ConstraintKind::c1_piecewise:
            if (a <= 1.0) return 0.0;
            if (a <= 1.0 + d) return (a - 1.0) / (d * d);
            return 1.0 / d;
        case ConstraintKind::yosida:
            return (r >= 1.0 || r < -1.0) ? 1.0 / d : 0.0;
    }
    return 0.0;
}

double ConstraintRegularization::potential(double r) const {
    const double d = delta_;
    const double a = std::abs(r);
    switch (kind_) {
        case ConstraintKind::hard:
            return a <= 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
        case ConstraintKind::c1_piecewise: {
            if (a <= 1.0) return 0.0;
            const double t = a - 1.0;
            if (t <= d) return t * t * t / (6.0 * d * d);
            return d / 6.0 + t * t / (2.0 * d) - 0.5 * t;
        }
        case ConstraintKind::yosida: {
            const double t = std::max(a - 1.0, 0.0);
            return t * t / (2.0 * d);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Reaction

namespace {

/// Real roots of a3 r^3 + a1 r + a0 = 0 for a3 > 0, Newton-polished.
std::vector<double> cubic_real_roots(double a3, double a1, double a0) {
    const double p = a1 / a3;
    const double q = a0 / a3;
    std::vector<double> roots;
    const double disc = 4.0 * p * p * p + 27.0 * q * q;
    if (p < 0.0 && disc < 0.0) {
        const double m = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(3.0 * q / (p * m) , -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0));
    } else {
        const double s = std::sqrt(std::max(q * q / 4.0 + p * p * p / 27.0, 0.0));
        roots.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s));
    }
    for (double& r : roots) {
        for (int it = 0; it < 4; ++it) {
            const double f = (r * r + p) * r + q;
            const double df = 3.0 * r * r + p;
            if (df == 0.0) break;
            r -= f / df;
        }
    }
    return roots;
}

}  // namespace

Reaction::Reaction(double a3, double a1, double a0) : a3_(a3), a1_(a1), a0_(a0) {
    if (!std::isfinite(a3) || !std::isfinite(a1) || !std::isfinite(a0)) {
        throw ConfigError("reaction coefficients must be finite");
    }
    if (a3 < 0.0) throw ConfigError("reaction requires a3 >= 0 (A3: nonnegative primitive)");
    if (a3 > 0.0) {
        double min_value = std::numeric_limits<double>::infinity();
        for (double r : cubic_real_roots(a3, a1, a0)) min_value = std::min(min_value, raw_primitive(r));
        offset_ = -min_value;
    } else if (a1 > 0.0) {
        offset_ = a0 * a0 / (2.0 * a1);
    } else if (a1 == 0.0 && a0 == 0.0) {
        offset_ = 0.0;
    } else {
        throw ConfigError("reaction g(r) = a1 r + a0 with a1 <= 0 has no nonnegative primitive (A3)");
    }
}

double Reaction::raw_primitive(double r) const noexcept {
    const double r2 = r * r;
    return 0.25 * a3_ * r2 * r2 + 0.5 * a1_ * r2 + a0_ * r;
}

double Reaction::potential(double r) const noexcept {
    // Double-well form avoids cancellation near the wells.
    if (a3_ > 0.0 && a0_ == 0.0 && a1_ < 0.0) {
        const double well = -a1_ / a3_;
        const double t = r * r - well;
        return 0.25 * a3_ * t * t;
    }
    return raw_primitive(r) + offset_;
}

// ---------------------------------------------------------------------------
// Resolvent

double resolvent(const FluxRegularization& flux, double nu, double z) {
    if (!(nu > 0.0)) throw PreconditionError("resolvent requires nu > 0");
    const double nu2 = nu * nu;
    if (!flux.smooth()) {
        return (z > 0.0 ? 1.0 : -1.0) * std::max(std::abs(z) - 1.0, 0.0) / nu2;
    }
    if (z == 0.0) return 0.0;

    // phi(y) = f'(y) + nu^2 y is increasing with |f'| <= 1, so the root lies in
    // [(z-1)/nu^2, (z+1)/nu^2]; tighten by the sign of z since f' is odd.
    double lo = (z - 1.0) / nu2;
    double hi = (z + 1.0) / nu2;
    if (z > 0.0) lo = std::max(lo, 0.0); else hi = std::min(hi, 0.0);
    double y = std::clamp(z / nu2, lo, hi);
    for (int it = 0; it < 200; ++it) {
        const double phi = flux.derivative(y) + nu2 * y - z;
        if (phi == 0.0) return y;
        if (phi > 0.0) hi = y; else lo = y;
        const double slope = flux.second_derivative(y) + nu2;
        double next = y - phi / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == y || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(y))) {
            return next;
        }
        y = next;
    }
    return y;
}

}  // namespace ac
