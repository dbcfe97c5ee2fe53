#pragma once

#include <utility>

#include "lastmile/cost_model.hpp"

namespace lastmile::solver {

struct EconParams {
    double rho = 0.025;   // discount rate per step
    double mu = 0.005;    // drift per step
    double sigma = 0.1;   // volatility per sqrt(step)

    // rho > mu and rho > (mu - sigma^2/4)/2 keep the perpetual integrals finite
    void validate() const;
};

struct SwitchCosts {
    double up = 1000.0;    // F+: cost of switching TO -> DT
    double down = 1000.0;  // F-: cost of switching DT -> TO

    void validate() const;
};

struct GammaRoots {
    double lower;  // gamma0 < 0
    double upper;  // gamma1 > 1 when rho > mu
};

struct ThresholdSolution {
    double q_low = 0.0;
    double q_high = 0.0;
    double a1 = 0.0;        // coefficient of Q^gamma0 in V1
    double b0 = 0.0;        // coefficient of Q^gamma1 in V0
    double residual = 0.0;  // max |condition| / max(1, F+, F-)
};

struct MultiOptionCosts {
    double entry = 0.0;       // I:   idle -> active
    double mothball = 0.0;    // E_M: active -> mothballed
    double reactivate = 0.0;  // R:   mothballed -> active
    double abandon = 0.0;     // E_S: mothballed -> idle

    void validate() const;
};

struct MultiOptionSolution {
    double q_enter = 0.0;       // idle -> active
    double q_mothball = 0.0;    // active -> mothballed
    double q_reactivate = 0.0;  // mothballed -> active
    double q_abandon = 0.0;     // mothballed -> idle
    double d0 = 0.0, d1 = 0.0;  // mothballed-state coefficients
    double a1 = 0.0, b0 = 0.0;  // active/idle coefficients
    double residual = 0.0;      // max of the eight conditions, scaled
};

enum class Direction { Up, Down };

// Roots of (sigma^2/2) g (g - 1) + mu g - rho = 0.
GammaRoots gamma_roots(const EconParams& econ);

// Perpetual-value terms of the saving flow: K1 linear in Q, K2 ~ sqrt(Q).
std::pair<double, double> k_terms(double q, const cost::OmegaCoeffs& coeffs,
                                  const EconParams& econ);

// Zero-switching-cost threshold Q*. Closed form (the condition is linear in
// K1(Q*), K2(Q*)), cross-checked against a bracketed bisection of the full
// smooth-fit condition to 1e-9 relative.
double solve_single_threshold(const cost::OmegaCoeffs& coeffs, const EconParams& econ);

// Entry-exit thresholds with switching costs: damped Newton on the four
// value-matching / smooth-pasting conditions in (A1, B0, ln Q_L, ln Q_H).
ThresholdSolution solve_thresholds(const cost::OmegaCoeffs& coeffs,
                                   const EconParams& econ, const SwitchCosts& costs);

// V0 (truck-only option value) and V1 (drone-assisted option value) at q.
std::pair<double, double> option_values(double q, const ThresholdSolution& sol,
                                        const cost::OmegaCoeffs& coeffs,
                                        const EconParams& econ);

// Expected time for the demand process to first reach `target` from `q`.
// Evaluates the model's closed form; excluded when mu == sigma^2/2.
double expected_transition_time(double q, double target, Direction direction,
                                double mu, double sigma);

// Entry/mothball/reactivate/abandon system, staged: the mothball-reactivate
// subsystem first (it closes in D0 and A1-D1), then entry and abandonment
// through the B0 and D1 elimination relations.
MultiOptionSolution solve_multi_option(const cost::OmegaCoeffs& entry_coeffs,
                                       const cost::OmegaCoeffs& mothball_coeffs,
                                       const EconParams& econ,
                                       const MultiOptionCosts& costs);

struct StagewiseThresholds {
    ThresholdSolution to_hybrid;    // stage 1: TO <-> HD
    ThresholdSolution hybrid_full;  // stage 2: HD <-> DT
};

// Four-threshold policy of the staged chain TO <-> HD <-> DT: Prop-1 solves of
// the two adjacent cost differences.
StagewiseThresholds stagewise_thresholds(const cost::CostParams& params,
                                         const cost::FleetMode& hybrid,
                                         const cost::FleetMode& full_dt,
                                         const EconParams& econ,
                                         const SwitchCosts& stage1,
                                         const SwitchCosts& stage2);

}  // namespace lastmile::solver
