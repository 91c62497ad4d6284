#pragma once

#include <stdexcept>
#include <string>

namespace steklov {

/// Input outside the domain of an operation (bad argument, inadmissible data).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to deliver (blow-up, non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Riccati integration diverged; `location` is the x where |m| exceeded the guard.
class BlowUpError : public NumericalError {
public:
    BlowUpError(const std::string& what, double location)
        : NumericalError(what), location_(location) {}
    double location() const noexcept { return location_; }

private:
    double location_;
};

}  // namespace steklov
