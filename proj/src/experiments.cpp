#include "lastmile/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lastmile/errors.hpp"

namespace lastmile::experiments {

void Scenario::validate() const {
    costs.validate();
    gbm.validate();
    econ.validate();
    switch_costs.validate();
    dt_mode.validate();
    hd_mode.validate();
    multi_costs.validate();
    if (policy_names.empty()) throw std::domain_error("scenario needs at least one policy");
    if (n_seeds < 1) throw std::domain_error("scenario needs a non-empty seed set");
}

void CarrierProfile::validate() const {
    if (name.empty()) throw std::domain_error("carrier name must not be empty");
    if (!(market_share > 0.0 && market_share < 1.0))
        throw std::domain_error("carrier market share must lie in (0, 1)");
    if (!(density > 0.0)) throw std::domain_error("carrier demand density must be positive");
    if (!(volatility >= 0.0)) throw std::domain_error("carrier volatility must be non-negative");
}

namespace {

struct FreeVector {
    std::array<double, 4> v;  // Ct, Cd, dt, cw
};

cost::CostParams apply_free(const cost::CostParams& base, const FreeVector& x) {
    cost::CostParams p = base;
    p.truck_unit_cost = x.v[0];
    p.drone_unit_cost = x.v[1];
    p.truck_stop_time = x.v[2];
    p.wait_value = x.v[3];
    return p;
}

}  // namespace

CalibrationResult calibrate(const CalibrationTargets& targets,
                            const cost::CostParams& initial,
                            const solver::EconParams& econ,
                            const CalibrationBounds& bounds) {
    initial.validate();
    econ.validate();
    const std::array<double, 4> lo{bounds.truck_cost_lo, bounds.drone_cost_lo,
                                   bounds.stop_time_lo, bounds.wait_value_lo};
    const std::array<double, 4> hi{bounds.truck_cost_hi, bounds.drone_cost_hi,
                                   bounds.stop_time_hi, bounds.wait_value_hi};
    int evaluations = 0;
    auto targets_at = [&](const FreeVector& x) -> std::pair<double, double> {
        ++evaluations;
        const cost::CostParams p = apply_free(initial, x);
        const cost::FleetMode to = cost::FleetMode::truck_only();
        const cost::FleetMode dt = cost::FleetMode::drone_assisted(p.drones_per_truck);
        const cost::OmegaCoeffs omega = cost::omega_coeffs(to, dt, p);
        return {cost::break_even(omega), solver::solve_single_threshold(omega, econ)};
    };
    auto objective = [&](const FreeVector& x) -> double {
        try {
            const auto [be, qs] = targets_at(x);
            const double r1 = (be - targets.break_even) / targets.break_even;
            const double r2 = (qs - targets.q_star) / targets.q_star;
            return r1 * r1 + r2 * r2;
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    FreeVector x{{std::clamp(initial.truck_unit_cost, lo[0], hi[0]),
                  std::clamp(initial.drone_unit_cost, lo[1], hi[1]),
                  std::clamp(initial.truck_stop_time, lo[2], hi[2]),
                  std::clamp(initial.wait_value, lo[3], hi[3])}};
    double fx = objective(x);

    if (fx > 1e-12) {  // not already a zero-residual fixed point
        std::array<double, 4> step;
        for (int j = 0; j < 4; ++j) step[j] = 0.25 * (hi[j] - lo[j]);
        // compass search with shrinking steps, tolerance 1e-6 on the objective
        for (int iter = 0; iter < 4000; ++iter) {
            bool improved = false;
            for (int j = 0; j < 4; ++j) {
                for (double dir : {+1.0, -1.0}) {
                    FreeVector xt = x;
                    xt.v[j] = std::clamp(xt.v[j] + dir * step[j], lo[j], hi[j]);
                    if (xt.v[j] == x.v[j]) continue;
                    const double ft = objective(xt);
                    if (ft < fx - 1e-18) {
                        x = xt;
                        fx = ft;
                        improved = true;
                    }
                }
            }
            if (!improved) {
                double max_step = 0.0;
                for (int j = 0; j < 4; ++j) {
                    step[j] *= 0.5;
                    max_step = std::max(max_step, step[j] / (hi[j] - lo[j]));
                }
                if (max_step < 1e-9) break;
            }
            if (fx < 1e-6 && !improved) break;
        }
    }

    if (!(fx <= 1e-3))
        throw SolverFailure("calibration residual above tolerance", fx);

    CalibrationResult out;
    out.params = apply_free(initial, x);
    out.objective = fx;
    const auto [be, qs] = targets_at(x);
    out.achieved_break_even = be;
    out.achieved_q_star = qs;
    out.evaluations = evaluations;
    return out;
}

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::Rho: return "rho";
        case SweepParameter::Mu: return "mu";
        case SweepParameter::Sigma: return "sigma";
        case SweepParameter::SwitchCost: return "switch_cost";
    }
    return "?";
}

std::vector<SweepRow> sweep(const Scenario& scenario, SweepParameter parameter,
                            const std::vector<double>& values) {
    scenario.validate();
    if (values.empty()) throw std::domain_error("sweep needs at least one value");
    const cost::OmegaCoeffs omega = cost::omega_coeffs(
        cost::FleetMode::truck_only(), scenario.dt_mode, scenario.costs);
    std::vector<SweepRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        SweepRow row;
        row.parameter = to_string(parameter);
        row.value = v;
        solver::EconParams econ = scenario.econ;
        solver::SwitchCosts costs = scenario.switch_costs;
        switch (parameter) {
            case SweepParameter::Rho: econ.rho = v; break;
            case SweepParameter::Mu: econ.mu = v; break;
            case SweepParameter::Sigma: econ.sigma = v; break;
            case SweepParameter::SwitchCost: costs.up = costs.down = v; break;
        }
        try {
            row.q_star = solver::solve_single_threshold(omega, econ);
            const solver::ThresholdSolution sol = solver::solve_thresholds(omega, econ, costs);
            row.q_low = sol.q_low;
            row.q_high = sol.q_high;
            row.low_gap = sol.q_low - row.q_star;
            row.high_gap = sol.q_high - row.q_star;
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<policy::PolicySpec> build_policies(const Scenario& scenario) {
    scenario.validate();
    const cost::FleetMode to = cost::FleetMode::truck_only();
    const cost::OmegaCoeffs omega = cost::omega_coeffs(to, scenario.dt_mode, scenario.costs);
    std::vector<policy::PolicySpec> specs;
    for (const std::string& name : scenario.policy_names) {
        policy::PolicySpec spec;
        spec.name = name;
        spec.base_mode = to;
        spec.alt_mode = scenario.dt_mode;
        spec.switch_costs = scenario.switch_costs;
        spec.dt_step = scenario.gbm.dt_step;
        if (name == "always_to") {
            spec.kind = policy::PolicyKind::AlwaysFirst;
        } else if (name == "always_dt") {
            spec.kind = policy::PolicyKind::AlwaysSecond;
        } else if (name == "ic") {
            spec.kind = policy::PolicyKind::ImmediateCostSaving;
        } else if (name == "deterministic") {
            spec.kind = policy::PolicyKind::Deterministic;
        } else if (name == "stochastic") {
            spec.kind = policy::PolicyKind::StochasticThreshold;
            spec.thresholds = solver::solve_thresholds(omega, scenario.econ,
                                                       scenario.switch_costs);
        } else if (name == "multi_option") {
            spec.kind = policy::PolicyKind::MultiOption;
            spec.hybrid_mode = scenario.hd_mode;
            spec.stage_thresholds = solver::stagewise_thresholds(
                scenario.costs, scenario.hd_mode, scenario.dt_mode, scenario.econ,
                scenario.switch_costs, scenario.switch_costs);
        } else {
            throw ConfigError("unknown policy name: " + name);
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

namespace {

EnsembleSummary summarize(const std::string& name, std::vector<double> values,
                          double mean_switches) {
    EnsembleSummary s;
    s.policy = name;
    const std::size_t n = values.size();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.mean = mean;
    s.sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    std::sort(values.begin(), values.end());
    auto pct = [&](double p) {
        const std::size_t idx = static_cast<std::size_t>(
            std::min<double>(std::ceil(p * n), static_cast<double>(n)) - 1);
        return values[idx];
    };
    s.p05 = pct(0.05);
    s.p25 = pct(0.25);
    s.p50 = pct(0.50);
    s.p75 = pct(0.75);
    s.p95 = pct(0.95);
    s.mean_switches = mean_switches;
    return s;
}

}  // namespace

EnsembleResult ensemble_study(const Scenario& scenario, int n_seeds) {
    if (n_seeds < 2) throw std::domain_error("ensemble needs at least 2 seeds");
    const std::vector<policy::PolicySpec> specs = build_policies(scenario);
    EnsembleResult out;
    out.policies.reserve(specs.size());
    out.savings.assign(specs.size(), std::vector<double>(n_seeds, 0.0));
    std::vector<double> switch_sum(specs.size(), 0.0);
    for (const auto& s : specs) out.policies.push_back(s.name);
    for (int i = 0; i < n_seeds; ++i) {
        const demand::DemandPath path = demand::simulate_path(
            scenario.gbm, demand::derive_seed(scenario.master_seed, i));
        for (std::size_t p = 0; p < specs.size(); ++p) {
            const policy::PolicyTrace trace = policy::run_policy(path, specs[p],
                                                                 scenario.costs);
            out.savings[p][i] = trace.total_savings;
            switch_sum[p] += static_cast<double>(trace.events.size());
        }
    }
    for (std::size_t p = 0; p < specs.size(); ++p)
        out.summaries.push_back(
            summarize(out.policies[p], out.savings[p], switch_sum[p] / n_seeds));
    return out;
}

std::vector<CarrierReport> run_case_study(const std::vector<CarrierProfile>& carriers,
                                          const Scenario& scenario) {
    if (carriers.empty()) throw std::domain_error("case study needs at least one carrier");
    scenario.validate();
    const cost::FleetMode to = cost::FleetMode::truck_only();
    const cost::OmegaCoeffs omega = cost::omega_coeffs(to, scenario.dt_mode, scenario.costs);

    std::vector<CarrierReport> reports;
    reports.reserve(carriers.size());
    for (const CarrierProfile& carrier : carriers) {
        CarrierReport rep;
        rep.name = carrier.name;
        try {
            carrier.validate();
            solver::EconParams econ = scenario.econ;
            econ.mu = carrier.growth;
            econ.sigma = carrier.volatility;
            rep.q_star = solver::solve_single_threshold(omega, econ);
            const solver::ThresholdSolution sol =
                solver::solve_thresholds(omega, econ, scenario.switch_costs);
            rep.q_low = sol.q_low;
            rep.q_high = sol.q_high;

            Scenario carrier_scenario = scenario;
            carrier_scenario.gbm.q0 = carrier.density;
            carrier_scenario.gbm.mu = carrier.growth;
            carrier_scenario.gbm.sigma = carrier.volatility;
            carrier_scenario.econ = econ;
            carrier_scenario.policy_names = {"ic", "deterministic", "stochastic"};
            const EnsembleResult ens = ensemble_study(carrier_scenario, scenario.n_seeds);
            rep.mean_ic = ens.summaries[0].mean;
            rep.mean_deterministic = ens.summaries[1].mean;
            rep.mean_stochastic = ens.summaries[2].mean;
            const double denom = std::abs(rep.mean_ic);
            rep.det_pct_vs_ic =
                denom > 0.0 ? (rep.mean_deterministic - rep.mean_ic) / denom * 100.0 : 0.0;
            rep.stoch_pct_vs_ic =
                denom > 0.0 ? (rep.mean_stochastic - rep.mean_ic) / denom * 100.0 : 0.0;
            rep.ok = true;
        } catch (const std::exception& e) {
            rep.error = e.what();
        }
        reports.push_back(std::move(rep));
    }
    return reports;
}

}  // namespace lastmile::experiments
