#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lastmile/cost_model.hpp"
#include "lastmile/demand.hpp"
#include "lastmile/policy.hpp"
#include "lastmile/solver.hpp"

namespace lastmile::experiments {

// A fully concrete experiment description (config files resolve to this).
struct Scenario {
    std::string name = "baseline";
    cost::CostParams costs;
    demand::GbmParams gbm;
    solver::EconParams econ;
    solver::SwitchCosts switch_costs;
    cost::FleetMode dt_mode = cost::FleetMode::drone_assisted(10);
    cost::FleetMode hd_mode = cost::FleetMode::default_hybrid();
    solver::MultiOptionCosts multi_costs{1000.0, 1000.0, 1000.0, 1000.0};
    std::vector<std::string> policy_names{"ic", "deterministic", "stochastic"};
    std::uint64_t master_seed = 42;
    int n_seeds = 200;
    double area_ratio = 5.0;

    void validate() const;
};

struct CalibrationTargets {
    double break_even = 70.2;
    double q_star = 70.6;
};

// Bound box of the free parameters (truck/drone unit cost, stop time, wait value).
struct CalibrationBounds {
    double truck_cost_lo = 0.1, truck_cost_hi = 5.0;
    double drone_cost_lo = 0.01, drone_cost_hi = 2.0;
    double stop_time_lo = 0.01, stop_time_hi = 0.2;
    double wait_value_lo = 0.0, wait_value_hi = 50.0;
};

struct CalibrationResult {
    cost::CostParams params;
    double objective = 0.0;  // sum of squared relative target misses
    double achieved_break_even = 0.0;
    double achieved_q_star = 0.0;
    int evaluations = 0;
};

// Bounded coordinate pattern search over {Ct, Cd, dt, cw} minimizing the
// squared relative misses of the two targets. Throws SolverFailure when the
// best objective stays above 1e-3.
CalibrationResult calibrate(const CalibrationTargets& targets,
                            const cost::CostParams& initial,
                            const solver::EconParams& econ,
                            const CalibrationBounds& bounds = {});

enum class SweepParameter { Rho, Mu, Sigma, SwitchCost };

std::string to_string(SweepParameter p);

struct SweepRow {
    std::string parameter;
    double value = 0.0;
    bool ok = false;
    double q_star = 0.0;
    double q_low = 0.0, low_gap = 0.0;    // low_gap = q_low - q_star
    double q_high = 0.0, high_gap = 0.0;  // high_gap = q_high - q_star
    std::string error;
};

// One threshold solve per value; failed cells are recorded, not fatal.
std::vector<SweepRow> sweep(const Scenario& scenario, SweepParameter parameter,
                            const std::vector<double>& values);

struct CarrierProfile {
    std::string name;
    double market_share = 0.0;  // fraction of parcel volume
    double density = 0.0;       // initial daily demand density (pkg/mi^2/day)
    double growth = 0.0;        // daily demand growth rate
    double volatility = 0.0;    // daily volatility rate

    void validate() const;
};

struct CarrierReport {
    std::string name;
    bool ok = false;
    double q_star = 0.0, q_low = 0.0, q_high = 0.0;
    double mean_ic = 0.0, mean_deterministic = 0.0, mean_stochastic = 0.0;
    double det_pct_vs_ic = 0.0, stoch_pct_vs_ic = 0.0;
    std::string error;
};

// Per-carrier thresholds plus seeded ensemble savings under the immediate,
// deterministic, and stochastic rules. A carrier whose solve or simulation
// fails is reported as a failed row, not a failed study.
std::vector<CarrierReport> run_case_study(const std::vector<CarrierProfile>& carriers,
                                          const Scenario& scenario);

struct EnsembleSummary {
    std::string policy;
    double mean = 0.0, sd = 0.0;
    double p05 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0;
    double mean_switches = 0.0;
};

struct EnsembleResult {
    std::vector<std::string> policies;
    std::vector<std::vector<double>> savings;  // [policy][seed]
    std::vector<EnsembleSummary> summaries;
};

// Net-savings distribution of each scenario policy over seeds
// derive_seed(master, 0..n_seeds-1); bit-reproducible and prefix-stable.
EnsembleResult ensemble_study(const Scenario& scenario, int n_seeds);

// Resolves the scenario's policy names into concrete specs (solving the
// threshold systems the stochastic and multi-option rules need).
std::vector<policy::PolicySpec> build_policies(const Scenario& scenario);

}  // namespace lastmile::experiments
