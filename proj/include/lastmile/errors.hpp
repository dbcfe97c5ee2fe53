#pragma once

#include <stdexcept>
#include <string>

namespace lastmile {

// Numerical-contract violations (exit code 2 at the CLI).
class SolverFailure : public std::runtime_error {
public:
    SolverFailure(const std::string& what, double best_residual)
        : std::runtime_error(what), best_residual_(best_residual) {}
    double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

// Thresholds solved but their ordering contradicts the switching regime.
class InfeasibleRegime : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A fitted alpha*Q + beta*sqrt(Q) failed to reproduce direct evaluation;
// signals a formula implementation bug, not bad user input.
class FunctionalFormError : public std::logic_error {
    using std::logic_error::logic_error;
};

// Bad configuration input (exit code 1 at the CLI).
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lastmile
