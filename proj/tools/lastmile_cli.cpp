// Command-line driver: threshold solving, path simulation, policy runs,
// sensitivity sweeps, the carrier case study, and cost-parameter calibration.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "lastmile/config.hpp"
#include "lastmile/csv.hpp"
#include "lastmile/errors.hpp"
#include "lastmile/experiments.hpp"

namespace fs = std::filesystem;
using lastmile::ConfigError;
using lastmile::SolverFailure;
using ordered_json = nlohmann::ordered_json;
namespace cost = lastmile::cost;
namespace demandns = lastmile::demand;
namespace solverns = lastmile::solver;
namespace policyns = lastmile::policy;
namespace experimentsns = lastmile::experiments;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonOptions {
    std::string config_path;
    std::string out_dir = "out";
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

experimentsns::Scenario load(const CommonOptions& opts) {
    const lastmile::config::Config cfg =
        lastmile::config::Config::parse_file(opts.config_path);
    experimentsns::Scenario scenario = lastmile::config::load_scenario(cfg);
    if (opts.seed_set) scenario.master_seed = opts.seed;
    return scenario;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << text;
}

void write_json(const std::string& path, const ordered_json& j) {
    write_text(path, j.dump(2) + "\n");
}

// ---------------- solve ----------------

int cmd_solve(const CommonOptions& opts) {
    const experimentsns::Scenario s = load(opts);
    const cost::FleetMode to = cost::FleetMode::truck_only();
    const cost::OmegaCoeffs omega = cost::omega_coeffs(to, s.dt_mode, s.costs);
    const double be = cost::break_even(omega);
    const double q_star = solverns::solve_single_threshold(omega, s.econ);
    const solverns::ThresholdSolution sol =
        solverns::solve_thresholds(omega, s.econ, s.switch_costs);
    const cost::OmegaCoeffs dt_coeffs = cost::mode_coeffs(s.dt_mode, s.costs);
    const cost::PrintedCoefficients printed = cost::printed_coefficients(s.costs);

    ordered_json j;
    j["scenario"] = s.name;
    j["saving_alpha"] = omega.alpha;
    j["saving_beta"] = omega.beta;
    j["break_even"] = be;
    j["q_star"] = q_star;
    j["q_low"] = sol.q_low;
    j["q_high"] = sol.q_high;
    j["a1"] = sol.a1;
    j["b0"] = sol.b0;
    j["residual"] = sol.residual;
    // literature closed forms, logged for comparison with the fitted values
    j["crosscheck"] = {{"dt_alpha_fitted", dt_coeffs.alpha},
                       {"dt_alpha_printed", printed.alpha2},
                       {"dt_beta_fitted", dt_coeffs.beta},
                       {"dt_beta_printed", printed.beta2},
                       {"saving_alpha_printed", printed.alpha3},
                       {"saving_beta_printed", printed.beta3}};
    const double nu = s.econ.mu - 0.5 * s.econ.sigma * s.econ.sigma;
    const bool excluded = std::abs(nu) <= 1e-14 * std::max(std::abs(s.econ.mu),
                                                           0.5 * s.econ.sigma * s.econ.sigma);
    if (!excluded) {
        if (s.gbm.q0 <= sol.q_high)
            j["expected_time_to_upper"] = solverns::expected_transition_time(
                s.gbm.q0, sol.q_high, solverns::Direction::Up, s.econ.mu, s.econ.sigma);
        if (s.gbm.q0 >= sol.q_low)
            j["expected_time_to_lower"] = solverns::expected_transition_time(
                s.gbm.q0, sol.q_low, solverns::Direction::Down, s.econ.mu, s.econ.sigma);
    }

    fs::create_directories(opts.out_dir);
    if (opts.format == "json") {
        write_json(opts.out_dir + "/thresholds.json", j);
    } else {
        lastmile::csv::Writer w({"key", "value"});
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                for (const auto& [k2, v2] : value.items())
                    w.cell(key + "." + k2).cell(v2.dump()), w.end_row();
            } else {
                w.cell(key).cell(value.is_string() ? value.get<std::string>() : value.dump());
                w.end_row();
            }
        }
        w.write_file(opts.out_dir + "/thresholds.csv");
    }
    std::cout << "q_star " << lastmile::csv::format_double(q_star) << "  q_low "
              << lastmile::csv::format_double(sol.q_low) << "  q_high "
              << lastmile::csv::format_double(sol.q_high) << "  residual "
              << lastmile::csv::format_double(sol.residual) << "\n";
    return kExitOk;
}

// ---------------- simulate ----------------

int cmd_simulate(const CommonOptions& opts, int max_paths, bool moments) {
    const experimentsns::Scenario s = load(opts);
    fs::create_directories(opts.out_dir);
    const int n = s.n_seeds;
    const int to_write = std::min(max_paths, n);
    for (int i = 0; i < to_write; ++i) {
        const demandns::DemandPath path =
            demandns::simulate_path(s.gbm, demandns::derive_seed(s.master_seed, i));
        lastmile::csv::Writer w({"step", "density"});
        for (std::size_t k = 0; k < path.values.size(); ++k)
            w.cell(static_cast<int>(k)).cell(path.values[k]), w.end_row();
        w.write_file(opts.out_dir + "/path_" + std::to_string(i) + ".csv");
    }
    if (moments) {
        const std::size_t len = static_cast<std::size_t>(s.gbm.horizon) + 1;
        std::vector<double> sum(len, 0.0), sumsq(len, 0.0);
        for (int i = 0; i < n; ++i) {
            const demandns::DemandPath path =
                demandns::simulate_path(s.gbm, demandns::derive_seed(s.master_seed, i));
            for (std::size_t k = 0; k < len; ++k) {
                sum[k] += path.values[k];
                sumsq[k] += path.values[k] * path.values[k];
            }
        }
        lastmile::csv::Writer w(
            {"step", "sample_mean", "model_mean", "sample_variance", "model_variance"});
        for (std::size_t k = 0; k < len; ++k) {
            const double mean = sum[k] / n;
            const double var = n > 1 ? (sumsq[k] - n * mean * mean) / (n - 1) : 0.0;
            const auto [m, v] = demandns::gbm_moments(s.gbm, k * s.gbm.dt_step);
            w.cell(static_cast<int>(k)).cell(mean).cell(m).cell(var).cell(v);
            w.end_row();
        }
        w.write_file(opts.out_dir + "/moments.csv");
    }
    std::cout << "wrote " << to_write << " path file(s)" << (moments ? " and moments.csv" : "")
              << "\n";
    return kExitOk;
}

// ---------------- policy ----------------

int cmd_policy(const CommonOptions& opts) {
    const experimentsns::Scenario s = load(opts);
    const std::vector<policyns::PolicySpec> specs = experimentsns::build_policies(s);
    fs::create_directories(opts.out_dir);

    const demandns::DemandPath path =
        demandns::simulate_path(s.gbm, demandns::derive_seed(s.master_seed, 0));
    for (const policyns::PolicySpec& spec : specs) {
        const policyns::PolicyTrace trace = policyns::run_policy(path, spec, s.costs);
        lastmile::csv::Writer w(
            {"step", "density", "mode", "event", "cumulative_cost", "cumulative_savings"});
        std::size_t next_event = 0;
        for (std::size_t k = 0; k < trace.demand.size(); ++k) {
            std::string event;
            if (next_event < trace.events.size() &&
                trace.events[next_event].step == static_cast<int>(k)) {
                event = trace.events[next_event].from + "->" + trace.events[next_event].to;
                ++next_event;
            }
            w.cell(static_cast<int>(k))
                .cell(trace.demand[k])
                .cell(trace.modes[k].label())
                .cell(event)
                .cell(trace.cumulative_cost[k])
                .cell(trace.cumulative_savings[k]);
            w.end_row();
        }
        w.write_file(opts.out_dir + "/trace_" + spec.name + ".csv");
    }

    const std::vector<policyns::ComparisonRow> rows =
        policyns::compare_policies(path, specs, s.costs);
    lastmile::csv::Writer cw({"policy", "net_savings", "pct_vs_first", "switches"});
    for (const auto& row : rows) {
        cw.cell(row.policy).cell(row.net_savings).cell(row.pct_vs_first).cell(row.switches);
        cw.end_row();
    }
    cw.write_file(opts.out_dir + "/comparison.csv");

    if (s.n_seeds >= 2) {
        const experimentsns::EnsembleResult ens = experimentsns::ensemble_study(s, s.n_seeds);
        lastmile::csv::Writer ew({"policy", "mean", "sd", "p05", "p25", "p50", "p75", "p95",
                                  "mean_switches", "pct_vs_first"});
        const double first = ens.summaries.front().mean;
        for (const auto& sum : ens.summaries) {
            const double pct =
                first != 0.0 ? (sum.mean - first) / std::abs(first) * 100.0 : 0.0;
            ew.cell(sum.policy)
                .cell(sum.mean)
                .cell(sum.sd)
                .cell(sum.p05)
                .cell(sum.p25)
                .cell(sum.p50)
                .cell(sum.p75)
                .cell(sum.p95)
                .cell(sum.mean_switches)
                .cell(pct);
            ew.end_row();
        }
        ew.write_file(opts.out_dir + "/ensemble.csv");
    }
    std::cout << "wrote " << specs.size() << " trace(s), comparison.csv"
              << (s.n_seeds >= 2 ? ", ensemble.csv" : "") << "\n";
    return kExitOk;
}

// ---------------- sweep ----------------

int cmd_sweep(const CommonOptions& opts) {
    const lastmile::config::Config cfg =
        lastmile::config::Config::parse_file(opts.config_path);
    experimentsns::Scenario s = lastmile::config::load_scenario(cfg);
    if (opts.seed_set) s.master_seed = opts.seed;
    struct Grid {
        experimentsns::SweepParameter parameter;
        std::vector<double> values;
    };
    std::vector<Grid> grids;
    if (const auto v = cfg.get_double_list("sweep.rho"); !v.empty())
        grids.push_back({experimentsns::SweepParameter::Rho, v});
    if (const auto v = cfg.get_double_list("sweep.mu"); !v.empty())
        grids.push_back({experimentsns::SweepParameter::Mu, v});
    if (const auto v = cfg.get_double_list("sweep.sigma"); !v.empty())
        grids.push_back({experimentsns::SweepParameter::Sigma, v});
    if (const auto v = cfg.get_double_list("sweep.switch_cost"); !v.empty())
        grids.push_back({experimentsns::SweepParameter::SwitchCost, v});
    if (grids.empty()) throw ConfigError("sweep needs at least one sweep.* value list");

    std::vector<experimentsns::SweepRow> rows;
    for (const Grid& grid : grids) {
        const auto part = experimentsns::sweep(s, grid.parameter, grid.values);
        rows.insert(rows.end(), part.begin(), part.end());
    }

    fs::create_directories(opts.out_dir);
    int ok_cells = 0;
    if (opts.format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& row : rows) {
            ordered_json r;
            r["parameter"] = row.parameter;
            r["value"] = row.value;
            if (row.ok) {
                r["q_star"] = row.q_star;
                r["q_low"] = row.q_low;
                r["low_gap"] = row.low_gap;
                r["q_high"] = row.q_high;
                r["high_gap"] = row.high_gap;
            } else {
                r["error"] = row.error;
            }
            j.push_back(r);
            ok_cells += row.ok;
        }
        write_json(opts.out_dir + "/sweep.json", j);
    } else {
        lastmile::csv::Writer w(
            {"parameter", "value", "q_star", "q_low", "low_gap", "q_high", "high_gap",
             "error"});
        for (const auto& row : rows) {
            w.cell(row.parameter).cell(row.value);
            if (row.ok) {
                w.cell(row.q_star).cell(row.q_low).cell(row.low_gap).cell(row.q_high)
                    .cell(row.high_gap).cell(std::string());
                ++ok_cells;
            } else {
                w.cell(std::string()).cell(std::string()).cell(std::string())
                    .cell(std::string()).cell(std::string()).cell(row.error);
            }
            w.end_row();
        }
        w.write_file(opts.out_dir + "/sweep.csv");
    }
    std::cout << ok_cells << "/" << rows.size() << " sweep cells solved\n";
    return ok_cells > 0 ? kExitOk : kExitNumerical;
}

// ---------------- case study ----------------

int cmd_case_study(const CommonOptions& opts, std::string carriers_path) {
    const lastmile::config::Config cfg =
        lastmile::config::Config::parse_file(opts.config_path);
    experimentsns::Scenario s = lastmile::config::load_scenario(cfg);
    if (opts.seed_set) s.master_seed = opts.seed;
    if (carriers_path.empty())
        carriers_path = cfg.get_string("case_study.carriers", "");
    if (carriers_path.empty())
        throw ConfigError("case study needs --carriers or the case_study.carriers key");
    const auto carriers = lastmile::config::load_carriers_csv(carriers_path);
    const auto reports = experimentsns::run_case_study(carriers, s);

    fs::create_directories(opts.out_dir);
    int ok_rows = 0;
    if (opts.format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& r : reports) {
            ordered_json row;
            row["carrier"] = r.name;
            if (r.ok) {
                row["q_star"] = r.q_star;
                row["q_low"] = r.q_low;
                row["q_high"] = r.q_high;
                row["mean_ic"] = r.mean_ic;
                row["mean_deterministic"] = r.mean_deterministic;
                row["det_pct_vs_ic"] = r.det_pct_vs_ic;
                row["mean_stochastic"] = r.mean_stochastic;
                row["stoch_pct_vs_ic"] = r.stoch_pct_vs_ic;
                ++ok_rows;
            } else {
                row["error"] = r.error;
            }
            j.push_back(row);
        }
        write_json(opts.out_dir + "/case_study.json", j);
    } else {
        lastmile::csv::Writer w({"carrier", "ic", "deterministic", "det_pct_vs_ic",
                                 "stochastic", "q_low", "q_high", "stoch_pct_vs_ic",
                                 "error"});
        for (const auto& r : reports) {
            w.cell(r.name);
            if (r.ok) {
                w.cell(r.mean_ic)
                    .cell(r.mean_deterministic)
                    .cell(r.det_pct_vs_ic)
                    .cell(r.mean_stochastic)
                    .cell(r.q_low)
                    .cell(r.q_high)
                    .cell(r.stoch_pct_vs_ic)
                    .cell(std::string());
                ++ok_rows;
            } else {
                for (int i = 0; i < 7; ++i) w.cell(std::string());
                w.cell(r.error);
            }
            w.end_row();
        }
        w.write_file(opts.out_dir + "/case_study.csv");
    }
    std::cout << ok_rows << "/" << reports.size() << " carrier(s) solved\n";
    return ok_rows > 0 ? kExitOk : kExitNumerical;
}

// ---------------- calibrate ----------------

int cmd_calibrate(const CommonOptions& opts) {
    const lastmile::config::Config cfg =
        lastmile::config::Config::parse_file(opts.config_path);
    experimentsns::Scenario s = lastmile::config::load_scenario(cfg);
    experimentsns::CalibrationTargets targets;
    targets.break_even = cfg.get_double("calibrate.target_break_even", targets.break_even);
    targets.q_star = cfg.get_double("calibrate.target_q_star", targets.q_star);
    const experimentsns::CalibrationResult result =
        experimentsns::calibrate(targets, s.costs, s.econ);

    experimentsns::Scenario fitted = s;
    fitted.costs = result.params;
    fitted.name = s.name + "_calibrated";
    fs::create_directories(opts.out_dir);
    write_text(opts.out_dir + "/baseline_calibrated.cfg",
               lastmile::config::scenario_to_config(fitted));
    ordered_json j;
    j["objective"] = result.objective;
    j["achieved_break_even"] = result.achieved_break_even;
    j["achieved_q_star"] = result.achieved_q_star;
    j["evaluations"] = result.evaluations;
    j["truck_unit_cost"] = result.params.truck_unit_cost;
    j["drone_unit_cost"] = result.params.drone_unit_cost;
    j["truck_stop_time"] = result.params.truck_stop_time;
    j["wait_value"] = result.params.wait_value;
    if (opts.format == "json") {
        write_json(opts.out_dir + "/calibration.json", j);
    } else {
        lastmile::csv::Writer w({"key", "value"});
        for (const auto& [key, value] : j.items()) w.cell(key).cell(value.dump()), w.end_row();
        w.write_file(opts.out_dir + "/calibration.csv");
    }
    std::cout << "calibrated: break_even "
              << lastmile::csv::format_double(result.achieved_break_even) << "  q_star "
              << lastmile::csv::format_double(result.achieved_q_star) << "  objective "
              << lastmile::csv::format_double(result.objective) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delivery-fleet switching: costs, thresholds, policies"};
    app.require_subcommand(1);

    CommonOptions opts;
    int max_paths = 10;
    bool moments = false;
    std::string carriers_path;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "scenario config file")->required();
        sub->add_option("--out", opts.out_dir, "output directory (default: out)");
        sub->add_option("--format", opts.format, "output format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", opts.seed, "master seed override")
            ->each([&](const std::string&) { opts.seed_set = true; });
    };

    CLI::App* solve = app.add_subcommand("solve", "solve switching thresholds");
    add_common(solve);
    CLI::App* simulate = app.add_subcommand("simulate", "simulate demand paths");
    add_common(simulate);
    simulate->add_option("--max-paths", max_paths, "cap on per-seed path files");
    simulate->add_flag("--moments", moments, "write ensemble moment summary");
    CLI::App* policy = app.add_subcommand("policy", "run and compare switching policies");
    add_common(policy);
    CLI::App* sweep = app.add_subcommand("sweep", "sensitivity sweep of the thresholds");
    add_common(sweep);
    CLI::App* case_study = app.add_subcommand("case-study", "per-carrier threshold study");
    add_common(case_study);
    case_study->add_option("--carriers", carriers_path, "carrier profile csv");
    CLI::App* calibrate = app.add_subcommand("calibrate", "fit the open cost parameters");
    add_common(calibrate);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(opts);
        if (simulate->parsed()) return cmd_simulate(opts, max_paths, moments);
        if (policy->parsed()) return cmd_policy(opts);
        if (sweep->parsed()) return cmd_sweep(opts);
        if (case_study->parsed()) return cmd_case_study(opts, carriers_path);
        if (calibrate->parsed()) return cmd_calibrate(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverFailure& e) {
        std::cerr << "numerical failure: " << e.what()
                  << " (best residual " << lastmile::csv::format_double(e.best_residual())
                  << ")\n";
        return kExitNumerical;
    } catch (const lastmile::InfeasibleRegime& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
