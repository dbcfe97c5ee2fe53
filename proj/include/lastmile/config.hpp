#pragma once

#include <map>
#include <string>
#include <vector>

#include "lastmile/experiments.hpp"

namespace lastmile::config {

// Dotted-key configuration text: one `section.key = value` per line,
// '#' comments. Unknown keys are rejected so typos surface as config errors.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    unsigned long long get_u64(const std::string& key, unsigned long long fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;   // empty if absent
    std::vector<std::string> get_string_list(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_;
};

// Resolves a config into a concrete scenario (validating every field).
experiments::Scenario load_scenario(const Config& config);

// Serializes a scenario back to config text (used by the calibrate command
// to emit the fitted parameter set).
std::string scenario_to_config(const experiments::Scenario& scenario);

// Two-column historical series (date-or-step, density).
std::vector<double> load_series_csv(const std::string& path);

std::vector<experiments::CarrierProfile> load_carriers_csv(const std::string& path);

}  // namespace lastmile::config
