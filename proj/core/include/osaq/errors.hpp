#pragma once

#include <stdexcept>
#include <string>

namespace osaq {

// Raised when a scenario field is outside its admissible range. Carries the
// offending field name so callers can report it.
class validation_error : public std::invalid_argument {
public:
    validation_error(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Numerical failure: a solver or recursion did not converge.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Offered load at or above 1; the queue has no stationary regime.
class instability_error : public std::runtime_error {
public:
    explicit instability_error(double rho)
        : std::runtime_error("offered load rho=" + std::to_string(rho) + " >= 1"),
          rho_(rho) {}

    double rho() const noexcept { return rho_; }

private:
    double rho_;
};

} // namespace osaq
