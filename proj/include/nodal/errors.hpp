#pragma once

#include <stdexcept>
#include <string>

namespace nodal {

/// Point outside the chart domain of a model manifold.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed or inconsistent configuration (field spec, manifold name, dimensions).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Caller misuse such as mismatched array lengths.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The field failed the nondegeneracy scan: f and grad f vanish (numerically) together.
class DegenerateFieldError : public std::runtime_error {
public:
    DegenerateFieldError(const std::string& what, double min_eta, double threshold)
        : std::runtime_error(what), min_eta_(min_eta), threshold_(threshold) {}

    double min_eta() const noexcept { return min_eta_; }
    double threshold() const noexcept { return threshold_; }

private:
    double min_eta_;
    double threshold_;
};

/// A non-finite value was produced during integration.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An oracle failed to reach a stable answer within its refinement budget.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nodal
