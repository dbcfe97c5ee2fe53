#include "lastmile/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "lastmile/csv.hpp"
#include "lastmile/errors.hpp"

namespace lastmile::config {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "scenario.name",
        "cost.zone_area", "cost.truck_unit_cost", "cost.drone_unit_cost",
        "cost.truck_stop_time", "cost.truck_stop_cost", "cost.drone_stop_cost",
        "cost.route_time", "cost.linehaul_speed", "cost.truck_speed",
        "cost.drone_speed", "cost.circuity_factor", "cost.linehaul_adjust",
        "cost.wait_value", "cost.drones_per_truck",
        "gbm.q0", "gbm.mu", "gbm.sigma", "gbm.step", "gbm.horizon",
        "econ.rho",
        "switch.up_cost", "switch.down_cost",
        "hd.mix",
        "policy.list",
        "ensemble.seeds", "seed",
        "region.area_ratio",
        "multi.entry_cost", "multi.mothball_cost", "multi.reactivate_cost",
        "multi.abandon_cost",
        "sweep.rho", "sweep.mu", "sweep.sigma", "sweep.switch_cost",
        "calibrate.target_break_even", "calibrate.target_q_star",
        "case_study.carriers",
    };
    return keys;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key or value");
        if (!known_keys().count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" +
                              key + "'");
        if (cfg.values_.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                              key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << f.rdbuf();
    return parse_string(buffer.str(), path);
}

bool Config::has(const std::string& key) const { return values_.count(key) != 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    return csv::parse_double(it->second, origin_ + " key " + key);
}

int Config::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    int v = 0;
    const auto res = std::from_chars(it->second.data(),
                                     it->second.data() + it->second.size(), v);
    if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
        throw ConfigError("cannot parse integer for key " + key);
    return v;
}

unsigned long long Config::get_u64(const std::string& key,
                                   unsigned long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    unsigned long long v = 0;
    const auto res = std::from_chars(it->second.data(),
                                     it->second.data() + it->second.size(), v);
    if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
        throw ConfigError("cannot parse unsigned integer for key " + key);
    return v;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    const auto it = values_.find(key);
    if (it == values_.end()) return out;
    for (const std::string& item : split(it->second, ','))
        out.push_back(csv::parse_double(item, origin_ + " key " + key));
    return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return {};
    return split(it->second, ',');
}

namespace {

cost::FleetMode parse_mix(const std::string& text) {
    std::vector<std::pair<cost::FleetMode, double>> mix;
    for (const std::string& item : split(text, ',')) {
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("hd.mix entries must look like 'to:0.25' or 'dt10:0.25'");
        const std::string mode = trim(item.substr(0, colon));
        const double eps = csv::parse_double(trim(item.substr(colon + 1)), "hd.mix");
        if (mode == "to") {
            mix.emplace_back(cost::FleetMode::truck_only(), eps);
        } else if (mode.rfind("dt", 0) == 0) {
            int n = 0;
            const std::string digits = mode.substr(2);
            const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), n);
            if (res.ec != std::errc{} || res.ptr != digits.data() + digits.size())
                throw ConfigError("cannot parse drone count in hd.mix entry '" + item + "'");
            mix.emplace_back(cost::FleetMode::drone_assisted(n), eps);
        } else {
            throw ConfigError("unknown mode '" + mode + "' in hd.mix");
        }
    }
    try {
        return cost::FleetMode::hybrid(std::move(mix));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid hd.mix: ") + e.what());
    }
}

}  // namespace

experiments::Scenario load_scenario(const Config& cfg) {
    experiments::Scenario s;
    s.name = cfg.get_string("scenario.name", s.name);

    s.costs.area = cfg.get_double("cost.zone_area", s.costs.area);
    s.costs.truck_unit_cost = cfg.get_double("cost.truck_unit_cost", s.costs.truck_unit_cost);
    s.costs.drone_unit_cost = cfg.get_double("cost.drone_unit_cost", s.costs.drone_unit_cost);
    s.costs.truck_stop_time = cfg.get_double("cost.truck_stop_time", s.costs.truck_stop_time);
    s.costs.truck_stop_cost = cfg.get_double("cost.truck_stop_cost", s.costs.truck_stop_cost);
    s.costs.drone_stop_cost = cfg.get_double("cost.drone_stop_cost", s.costs.drone_stop_cost);
    s.costs.route_time = cfg.get_double("cost.route_time", s.costs.route_time);
    s.costs.linehaul_speed = cfg.get_double("cost.linehaul_speed", s.costs.linehaul_speed);
    s.costs.truck_speed = cfg.get_double("cost.truck_speed", s.costs.truck_speed);
    s.costs.drone_speed = cfg.get_double("cost.drone_speed", s.costs.drone_speed);
    s.costs.circuity = cfg.get_double("cost.circuity_factor", s.costs.circuity);
    s.costs.linehaul_adjust = cfg.get_double("cost.linehaul_adjust", s.costs.linehaul_adjust);
    s.costs.wait_value = cfg.get_double("cost.wait_value", s.costs.wait_value);
    s.costs.drones_per_truck = cfg.get_int("cost.drones_per_truck", s.costs.drones_per_truck);

    s.gbm.q0 = cfg.get_double("gbm.q0", s.gbm.q0);
    s.gbm.mu = cfg.get_double("gbm.mu", s.gbm.mu);
    s.gbm.sigma = cfg.get_double("gbm.sigma", s.gbm.sigma);
    s.gbm.dt_step = cfg.get_double("gbm.step", s.gbm.dt_step);
    s.gbm.horizon = cfg.get_int("gbm.horizon", s.gbm.horizon);

    s.econ.rho = cfg.get_double("econ.rho", s.econ.rho);
    s.econ.mu = s.gbm.mu;
    s.econ.sigma = s.gbm.sigma;

    s.switch_costs.up = cfg.get_double("switch.up_cost", s.switch_costs.up);
    s.switch_costs.down = cfg.get_double("switch.down_cost", s.switch_costs.down);

    s.dt_mode = cost::FleetMode::drone_assisted(s.costs.drones_per_truck);
    if (cfg.has("hd.mix")) s.hd_mode = parse_mix(cfg.get_string("hd.mix", ""));

    if (cfg.has("policy.list")) s.policy_names = cfg.get_string_list("policy.list");
    s.master_seed = cfg.get_u64("seed", s.master_seed);
    s.n_seeds = cfg.get_int("ensemble.seeds", s.n_seeds);
    s.area_ratio = cfg.get_double("region.area_ratio", s.area_ratio);

    s.multi_costs.entry = cfg.get_double("multi.entry_cost", s.multi_costs.entry);
    s.multi_costs.mothball = cfg.get_double("multi.mothball_cost", s.multi_costs.mothball);
    s.multi_costs.reactivate =
        cfg.get_double("multi.reactivate_cost", s.multi_costs.reactivate);
    s.multi_costs.abandon = cfg.get_double("multi.abandon_cost", s.multi_costs.abandon);

    try {
        s.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid scenario: ") + e.what());
    }
    return s;
}

std::string scenario_to_config(const experiments::Scenario& s) {
    std::ostringstream out;
    out << "scenario.name = " << s.name << "\n\n";
    auto num = [](double v) { return csv::format_double(v); };
    out << "cost.zone_area = " << num(s.costs.area) << "\n";
    out << "cost.truck_unit_cost = " << num(s.costs.truck_unit_cost) << "\n";
    out << "cost.drone_unit_cost = " << num(s.costs.drone_unit_cost) << "\n";
    out << "cost.truck_stop_time = " << num(s.costs.truck_stop_time) << "\n";
    out << "cost.truck_stop_cost = " << num(s.costs.truck_stop_cost) << "\n";
    out << "cost.drone_stop_cost = " << num(s.costs.drone_stop_cost) << "\n";
    out << "cost.route_time = " << num(s.costs.route_time) << "\n";
    out << "cost.linehaul_speed = " << num(s.costs.linehaul_speed) << "\n";
    out << "cost.truck_speed = " << num(s.costs.truck_speed) << "\n";
    out << "cost.drone_speed = " << num(s.costs.drone_speed) << "\n";
    out << "cost.circuity_factor = " << num(s.costs.circuity) << "\n";
    out << "cost.linehaul_adjust = " << num(s.costs.linehaul_adjust) << "\n";
    out << "cost.wait_value = " << num(s.costs.wait_value) << "\n";
    out << "cost.drones_per_truck = " << s.costs.drones_per_truck << "\n\n";
    out << "gbm.q0 = " << num(s.gbm.q0) << "\n";
    out << "gbm.mu = " << num(s.gbm.mu) << "\n";
    out << "gbm.sigma = " << num(s.gbm.sigma) << "\n";
    out << "gbm.step = " << num(s.gbm.dt_step) << "\n";
    out << "gbm.horizon = " << s.gbm.horizon << "\n\n";
    out << "econ.rho = " << num(s.econ.rho) << "\n\n";
    out << "switch.up_cost = " << num(s.switch_costs.up) << "\n";
    out << "switch.down_cost = " << num(s.switch_costs.down) << "\n\n";
    out << "hd.mix = ";
    for (std::size_t i = 0; i < s.hd_mode.mix.size(); ++i) {
        const auto& [mode, eps] = s.hd_mode.mix[i];
        if (i) out << ",";
        out << (mode.kind == cost::FleetKind::TruckOnly
                    ? std::string("to")
                    : "dt" + std::to_string(mode.drones))
            << ":" << num(eps);
    }
    out << "\n\n";
    out << "policy.list = ";
    for (std::size_t i = 0; i < s.policy_names.size(); ++i) {
        if (i) out << ",";
        out << s.policy_names[i];
    }
    out << "\n";
    out << "ensemble.seeds = " << s.n_seeds << "\n";
    out << "seed = " << s.master_seed << "\n";
    out << "region.area_ratio = " << num(s.area_ratio) << "\n\n";
    out << "multi.entry_cost = " << num(s.multi_costs.entry) << "\n";
    out << "multi.mothball_cost = " << num(s.multi_costs.mothball) << "\n";
    out << "multi.reactivate_cost = " << num(s.multi_costs.reactivate) << "\n";
    out << "multi.abandon_cost = " << num(s.multi_costs.abandon) << "\n";
    return out.str();
}

std::vector<double> load_series_csv(const std::string& path) {
    const csv::Table table = csv::read_file(path);
    if (table.header.size() < 2)
        throw ConfigError("series csv needs two columns (index, density): " + path);
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].size() < 2)
            throw ConfigError("series csv row " + std::to_string(i + 2) +
                              " is too short in " + path);
        out.push_back(csv::parse_double(table.rows[i][1], path));
    }
    return out;
}

std::vector<experiments::CarrierProfile> load_carriers_csv(const std::string& path) {
    const csv::Table table = csv::read_file(path);
    const std::vector<std::string> expected{"name", "market_share", "density", "growth",
                                            "volatility"};
    if (table.header != expected)
        throw ConfigError("carriers csv must have header "
                          "name,market_share,density,growth,volatility: " + path);
    std::vector<experiments::CarrierProfile> out;
    for (const auto& row : table.rows) {
        if (row.size() != 5)
            throw ConfigError("carriers csv row has wrong width in " + path);
        experiments::CarrierProfile c;
        c.name = row[0];
        c.market_share = csv::parse_double(row[1], path);
        c.density = csv::parse_double(row[2], path);
        c.growth = csv::parse_double(row[3], path);
        c.volatility = csv::parse_double(row[4], path);
        try {
            c.validate();
        } catch (const std::exception& e) {
            throw ConfigError("invalid carrier '" + c.name + "': " + e.what());
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace lastmile::config
