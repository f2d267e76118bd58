#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ramac {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// An argument violated a documented precondition (range, sign, shape).
class domain_error : public error {
public:
    using error::error;
};

/// A required optional parameter was absent (e.g. Rician K factor).
class missing_parameter_error : public error {
public:
    using error::error;
};

/// An inverse/search problem has no solution in the admissible range.
class no_solution_error : public error {
public:
    using error::error;
};

/// A metric is undefined because the offered load is zero.
class degenerate_load_error : public error {
public:
    using error::error;
};

/// The chain has no unique stationary distribution (reducible/periodic).
class non_unique_equilibrium_error : public error {
public:
    using error::error;
};

/// Simulation and analytic results refer to different scenarios.
class comparison_error : public error {
public:
    using error::error;
};

/// Scenario file or preset could not be parsed/validated.
class parse_error : public error {
public:
    using error::error;
};

/// Fixed-point or iterative solve failed to reach tolerance.
/// Carries the last iterate and its residual for diagnosis.
class convergence_error : public error {
public:
    convergence_error(const std::string& what, std::vector<double> last_iterate,
                      double residual)
        : error(what), last_iterate_(std::move(last_iterate)), residual_(residual) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
    double residual() const noexcept { return residual_; }

private:
    std::vector<double> last_iterate_;
    double residual_;
};

}  // namespace ramac
