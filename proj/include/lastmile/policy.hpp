#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lastmile/cost_model.hpp"
#include "lastmile/demand.hpp"
#include "lastmile/solver.hpp"

namespace lastmile::policy {

enum class PolicyKind {
    AlwaysFirst,          // never leaves the initial (baseline) mode
    AlwaysSecond,         // statically deploys the alternative mode
    ImmediateCostSaving,  // switch the instant the saving flow changes sign
    Deterministic,        // switch when |instantaneous saving| reaches the switch cost
    StochasticThreshold,  // entry-exit thresholds from the real-option solve
    MultiOption,          // four-threshold staged chain TO <-> HD <-> DT
};

// A switching rule over a two-mode pair (base, alt), or over the staged
// chain base <-> hybrid <-> alt for MultiOption.
struct PolicySpec {
    PolicyKind kind = PolicyKind::ImmediateCostSaving;
    std::string name;  // row label in comparison tables
    cost::FleetMode base_mode = cost::FleetMode::truck_only();
    cost::FleetMode alt_mode = cost::FleetMode::drone_assisted(10);
    cost::FleetMode hybrid_mode;                    // MultiOption only
    solver::SwitchCosts switch_costs{1000.0, 1000.0};
    solver::ThresholdSolution thresholds;           // StochasticThreshold
    solver::StagewiseThresholds stage_thresholds;   // MultiOption
    bool start_in_alt = false;
    double dt_step = 1.0;  // accrual step length (days), from the demand process

    void validate() const;
};

struct SwitchEvent {
    int step = 0;
    std::string from;
    std::string to;
    double cost_paid = 0.0;
};

// Mode sequence, switch events, and running accounts for one demand path.
// Accrual covers steps 0..H-1 (left Riemann over the horizon); the final
// path point carries the last mode and accrues nothing.
struct PolicyTrace {
    std::string policy_name;
    double dt_step = 1.0;
    std::vector<double> demand;           // copy of the driving path
    std::vector<cost::FleetMode> modes;   // per step, same length as demand
    std::vector<SwitchEvent> events;
    std::vector<double> cumulative_cost;     // operating cost, after each step
    std::vector<double> cumulative_savings; // net savings vs always-base
    double total_cost = 0.0;
    double total_savings = 0.0;
};

PolicyTrace run_policy(const demand::DemandPath& path, const PolicySpec& spec,
                       const cost::CostParams& params);

// Independent double-entry recomputation from the recorded mode sequence;
// must equal trace.total_savings bit-exactly.
double accumulate_savings(const PolicyTrace& trace, const cost::CostParams& params);

struct ComparisonRow {
    std::string policy;
    double net_savings = 0.0;
    double pct_vs_first = 0.0;
    int switches = 0;
};

// Runs every spec on the identical path; percentages are relative to the
// first (baseline) spec's net savings.
std::vector<ComparisonRow> compare_policies(const demand::DemandPath& path,
                                            const std::vector<PolicySpec>& specs,
                                            const cost::CostParams& params);

}  // namespace lastmile::policy
