#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ac {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: invalid grid, malformed config, unknown key, violated assumption.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A standing assumption (A1)-(A6) failed; `assumption()` names it, e.g. "A5".
class AssumptionError : public ConfigError {
public:
    AssumptionError(std::string assumption, const std::string& message)
        : ConfigError(message), assumption_(std::move(assumption)) {}
    const std::string& assumption() const noexcept { return assumption_; }

private:
    std::string assumption_;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class GridMismatchError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class SingularSystemError : public Error {
public:
    using Error::Error;
};

/// Derivative requested at a kink of a nonsmooth function (|r| at r = 0).
class NondifferentiableError : public Error {
public:
    using Error::Error;
};

/// Pointwise evaluation requested for a constraint kind that has none (the hard indicator).
class ConstraintKindError : public Error {
public:
    using Error::Error;
};

/// Damped Newton hit its iteration cap. Carries the last iterate and the residual history.
class NonconvergenceError : public Error {
public:
    NonconvergenceError(const std::string& message, std::size_t step,
                        std::vector<double> last_iterate, std::vector<double> residual_history)
        : Error(message),
          step_(step),
          last_iterate_(std::move(last_iterate)),
          residual_history_(std::move(residual_history)) {}

    std::size_t step() const noexcept { return step_; }
    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    const std::vector<double>& residual_history() const noexcept { return residual_history_; }

private:
    std::size_t step_;
    std::vector<double> last_iterate_;
    std::vector<double> residual_history_;
};

}  // namespace ac
