#include "lastmile/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace lastmile::policy {

namespace {

// position of a mode within the (base, hybrid, alt) chain
enum ChainPos : int { kBase = 0, kHybrid = 1, kAlt = 2 };

}  // namespace

void PolicySpec::validate() const {
    base_mode.validate();
    alt_mode.validate();
    switch_costs.validate();
    // savings accounting is anchored on the truck-only baseline
    if (base_mode.kind != cost::FleetKind::TruckOnly)
        throw std::domain_error("policy base mode must be truck-only");
    if (kind == PolicyKind::MultiOption) {
        hybrid_mode.validate();
        if (hybrid_mode.kind != cost::FleetKind::Hybrid)
            throw std::domain_error("multi-option policy requires a hybrid middle mode");
        auto positive = [](const solver::ThresholdSolution& t) {
            return t.q_low > 0.0 && t.q_high > 0.0 && t.q_low <= t.q_high;
        };
        if (!positive(stage_thresholds.to_hybrid) || !positive(stage_thresholds.hybrid_full))
            throw std::domain_error("multi-option policy requires two valid threshold pairs");
    }
    if (kind == PolicyKind::StochasticThreshold) {
        if (!(thresholds.q_low > 0.0) || !(thresholds.q_low <= thresholds.q_high))
            throw std::domain_error("stochastic policy requires a valid threshold solution");
    }
    if (!(dt_step > 0.0)) throw std::domain_error("policy step length must be positive");
}

PolicyTrace run_policy(const demand::DemandPath& path, const PolicySpec& spec,
                       const cost::CostParams& params) {
    spec.validate();
    params.validate();
    if (path.values.empty()) throw std::domain_error("demand path must not be empty");

    PolicyTrace trace;
    trace.policy_name = spec.name.empty() ? "policy" : spec.name;
    trace.dt_step = spec.dt_step;
    trace.demand = path.values;
    const std::size_t steps = path.values.size();
    trace.modes.reserve(steps);
    trace.cumulative_cost.reserve(steps);
    trace.cumulative_savings.reserve(steps);

    auto saving_flow = [&](double q) {
        return cost::total_cost(spec.base_mode, q, params) -
               cost::total_cost(spec.alt_mode, q, params);
    };
    auto mode_at = [&](int pos) -> const cost::FleetMode& {
        switch (pos) {
            case kBase: return spec.base_mode;
            case kHybrid: return spec.hybrid_mode;
            default: return spec.alt_mode;
        }
    };

    int pos = spec.start_in_alt ? kAlt : kBase;
    if (spec.kind == PolicyKind::AlwaysSecond) pos = kAlt;
    if (spec.kind == PolicyKind::AlwaysFirst) pos = kBase;

    double cum_cost = 0.0;
    double cum_savings = 0.0;
    const double dt = trace.dt_step;

    for (std::size_t k = 0; k < steps; ++k) {
        const double q = path.values[k];
        const bool accrual_step = k + 1 < steps;

        // trigger check on the revealed value; at most one transition
        int next = pos;
        if (accrual_step) {
            switch (spec.kind) {
                case PolicyKind::AlwaysFirst:
                case PolicyKind::AlwaysSecond:
                    break;
                case PolicyKind::ImmediateCostSaving: {
                    const double w = saving_flow(q);
                    if (pos == kBase && w >= 0.0) next = kAlt;
                    else if (pos == kAlt && w <= 0.0) next = kBase;
                    break;
                }
                case PolicyKind::Deterministic: {
                    const double w = saving_flow(q);
                    if (pos == kBase && w >= spec.switch_costs.up) next = kAlt;
                    else if (pos == kAlt && -w >= spec.switch_costs.down) next = kBase;
                    break;
                }
                case PolicyKind::StochasticThreshold: {
                    if (pos == kBase && q >= spec.thresholds.q_high) next = kAlt;
                    else if (pos == kAlt && q <= spec.thresholds.q_low) next = kBase;
                    break;
                }
                case PolicyKind::MultiOption: {
                    if (pos == kBase && q >= spec.stage_thresholds.to_hybrid.q_high)
                        next = kHybrid;
                    else if (pos == kHybrid && q >= spec.stage_thresholds.hybrid_full.q_high)
                        next = kAlt;
                    else if (pos == kHybrid && q <= spec.stage_thresholds.to_hybrid.q_low)
                        next = kBase;
                    else if (pos == kAlt && q <= spec.stage_thresholds.hybrid_full.q_low)
                        next = kHybrid;
                    break;
                }
            }
        }
        if (next != pos) {
            const double paid = next > pos ? spec.switch_costs.up : spec.switch_costs.down;
            trace.events.push_back(SwitchEvent{static_cast<int>(k), mode_at(pos).label(),
                                               mode_at(next).label(), paid});
            cum_savings -= paid;
            pos = next;
        }
        trace.modes.push_back(mode_at(pos));
        if (accrual_step) {
            const double mode_cost = cost::total_cost(mode_at(pos), q, params);
            cum_cost += mode_cost * dt;
            if (pos != kBase)
                cum_savings += (cost::total_cost(spec.base_mode, q, params) - mode_cost) * dt;
        }
        trace.cumulative_cost.push_back(cum_cost);
        trace.cumulative_savings.push_back(cum_savings);
    }
    trace.total_cost = cum_cost;
    trace.total_savings = cum_savings;
    return trace;
}

double accumulate_savings(const PolicyTrace& trace, const cost::CostParams& params) {
    // replays the account in path order (cost at the switch step, then the
    // step's flow), so the result is bit-identical to the recorded total
    double savings = 0.0;
    std::size_t next_event = 0;
    for (std::size_t k = 0; k < trace.demand.size(); ++k) {
        while (next_event < trace.events.size() &&
               trace.events[next_event].step == static_cast<int>(k)) {
            savings -= trace.events[next_event].cost_paid;
            ++next_event;
        }
        if (k + 1 == trace.demand.size()) break;  // final point accrues nothing
        const cost::FleetMode& mode = trace.modes[k];
        if (mode.kind == cost::FleetKind::TruckOnly) continue;
        const double q = trace.demand[k];
        savings += (cost::total_cost(cost::FleetMode::truck_only(), q, params) -
                    cost::total_cost(mode, q, params)) *
                   trace.dt_step;
    }
    return savings;
}

std::vector<ComparisonRow> compare_policies(const demand::DemandPath& path,
                                            const std::vector<PolicySpec>& specs,
                                            const cost::CostParams& params) {
    if (specs.empty()) throw std::domain_error("at least one policy spec is required");
    std::vector<ComparisonRow> rows;
    rows.reserve(specs.size());
    double first = 0.0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const PolicyTrace trace = run_policy(path, specs[i], params);
        ComparisonRow row;
        row.policy = trace.policy_name;
        row.net_savings = trace.total_savings;
        row.switches = static_cast<int>(trace.events.size());
        if (i == 0) {
            first = row.net_savings;
            row.pct_vs_first = 0.0;
        } else {
            row.pct_vs_first =
                first != 0.0 ? (row.net_savings - first) / std::abs(first) * 100.0 : 0.0;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace lastmile::policy
