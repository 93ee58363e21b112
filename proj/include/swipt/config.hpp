// SPDX-License-Identifier: Apache-2.0
//
// swipt-ee — energy-efficient resource allocation for multiuser OFDM downlinks
// with simultaneous wireless information and power transfer
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Scenario files: one `key = value [unit]` pair per line, `#` comments.
// Powers accept an explicit dBm/W/mW suffix and are converted to Watt on
// load; bandwidths accept Hz/kHz/MHz/GHz, rates bps/kbps/Mbps/Gbps. Per-user
// entries (min_harvest, harvest_efficiency, weights) take either a scalar,
// which is broadcast, or one value per user.

#ifndef SWIPT_CONFIG_HPP
#define SWIPT_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "system_params.hpp"
#include "units.hpp"

namespace swipt {

class config_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Parsed scenario: the static system description plus the experiment knobs.
struct ScenarioConfig
{
    SystemParams params;
    std::uint64_t seed = 1;
    int realizations = 1000;
    int iteration_budget = 0;
    int workers = 1;
    std::vector<double> sweep_pmax_dbm = {10, 14, 18, 22, 26, 30, 34, 38, 42, 46};
    std::vector<int> sweep_users = {1, 2, 4, 8};
    std::vector<int> convergence_budgets = {1, 2, 3, 5, 7, 10, 15, 20, 30, 50, 100, 200};

    ExperimentSpec experiment() const
    {
        ExperimentSpec spec;
        spec.base = params;
        spec.pmax_dbm_sweep = sweep_pmax_dbm;
        spec.user_sweep = sweep_users;
        spec.realizations = realizations;
        spec.seed = seed;
        spec.iteration_budget = iteration_budget;
        spec.convergence_budgets = convergence_budgets;
        spec.workers = workers;
        return spec;
    }
};

namespace detail {

struct config_entry
{
    std::vector<double> values;
    std::string unit;
    int line = 0;
    bool used = false;
};

inline bool parse_number(const std::string &tok, double &out)
{
    char *end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end != nullptr && *end == '\0' && end != tok.c_str();
}

// Unit conversion: powers to Watt, frequencies to Hz, rates to bit/s,
// distances to meters. dB values stay in dB. An empty unit means the value is
// already in base units.
inline double apply_unit(double v, const std::string &unit, const std::string &key, int line)
{
    if (unit.empty())
        return v;
    if (unit == "dBm" || unit == "dbm")
        return dbm_to_watt(v);
    if (unit == "W")
        return v;
    if (unit == "mW")
        return v * 1e-3;
    if (unit == "uW")
        return v * 1e-6;
    if (unit == "Hz")
        return v;
    if (unit == "kHz")
        return v * 1e3;
    if (unit == "MHz")
        return v * 1e6;
    if (unit == "GHz")
        return v * 1e9;
    if (unit == "bps")
        return v;
    if (unit == "kbps")
        return v * 1e3;
    if (unit == "Mbps")
        return v * 1e6;
    if (unit == "Gbps")
        return v * 1e9;
    if (unit == "m")
        return v;
    if (unit == "dB" || unit == "db")
        return v;
    throw config_error("config line " + std::to_string(line) + ": key '" + key +
                       "': unknown unit '" + unit + "'");
}

} // namespace detail

inline ScenarioConfig load_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open scenario file '" + path + "'");

    std::map<std::string, detail::config_entry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        // trim
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos)
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) +
                               ": expected 'key = value', got '" + line + "'");
        std::string key = line.substr(0, eq);
        std::string rhs = line.substr(eq + 1);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        key = trim(key);
        rhs = trim(rhs);
        if (key.empty() || rhs.empty())
            throw config_error("config line " + std::to_string(line_no) +
                               ": empty key or value");

        detail::config_entry entry;
        entry.line = line_no;
        std::istringstream ss(rhs);
        std::string tok;
        while (ss >> tok) {
            double v;
            if (detail::parse_number(tok, v)) {
                if (!entry.unit.empty())
                    throw config_error("config line " + std::to_string(line_no) + ": key '" +
                                       key + "': values after the unit suffix");
                entry.values.push_back(v);
            } else {
                if (!entry.unit.empty())
                    throw config_error("config line " + std::to_string(line_no) + ": key '" +
                                       key + "': more than one unit suffix");
                entry.unit = tok;
            }
        }
        if (entry.values.empty())
            throw config_error("config line " + std::to_string(line_no) + ": key '" + key +
                               "': no numeric value");
        if (entries.count(key))
            throw config_error("config line " + std::to_string(line_no) + ": key '" + key +
                               "' given twice (first at line " +
                               std::to_string(entries[key].line) + ")");
        entries[key] = entry;
    }

    ScenarioConfig cfg;
    SystemParams &p = cfg.params;
    p = SystemParams{}; // all fields set explicitly below or by the file

    auto take_scalar = [&](const std::string &key, bool required, double fallback) {
        auto it = entries.find(key);
        if (it == entries.end()) {
            if (required)
                throw config_error("scenario file '" + path + "': missing required key '" + key +
                                   "'");
            return fallback;
        }
        it->second.used = true;
        if (it->second.values.size() != 1)
            throw config_error("config line " + std::to_string(it->second.line) + ": key '" +
                               key + "' expects a single value");
        return detail::apply_unit(it->second.values[0], it->second.unit, key, it->second.line);
    };
    auto take_list = [&](const std::string &key, int length, double fallback) {
        std::vector<double> out;
        auto it = entries.find(key);
        if (it == entries.end()) {
            out.assign(length, fallback);
            return out;
        }
        it->second.used = true;
        for (double v : it->second.values)
            out.push_back(detail::apply_unit(v, it->second.unit, key, it->second.line));
        if (static_cast<int>(out.size()) == 1)
            out.assign(length, out[0]);
        if (static_cast<int>(out.size()) != length)
            throw config_error("config line " + std::to_string(it->second.line) + ": key '" +
                               key + "' expects 1 or " + std::to_string(length) + " values");
        return out;
    };

    p.num_users = static_cast<int>(take_scalar("num_users", true, 0));
    p.num_subcarriers = static_cast<int>(take_scalar("num_subcarriers", true, 0));
    p.total_bandwidth_hz = take_scalar("total_bandwidth", true, 0);
    p.subcarrier_bandwidth_hz =
        take_scalar("subcarrier_bandwidth", false, p.total_bandwidth_hz / p.num_subcarriers);
    p.carrier_frequency_hz = take_scalar("carrier_frequency", true, 0);
    p.noise_variance_w = take_scalar("noise_variance", true, 0);
    p.circuit_power_w = take_scalar("circuit_power", true, 0);
    p.max_tx_power_w = take_scalar("max_tx_power", true, 0);
    p.grid_power_w = take_scalar("grid_power", true, 0);
    p.min_rate_bps = take_scalar("min_rate", true, 0);
    p.amplifier_inefficiency = take_scalar("amplifier_inefficiency", true, 0);
    p.ref_distance_m = take_scalar("ref_distance", true, 0);
    p.max_distance_m = take_scalar("max_distance", true, 0);
    p.antenna_gain_db = take_scalar("antenna_gain", false, 0.0);
    p.path_loss_exponent = take_scalar("path_loss_exponent", false, 3.5);
    p.min_harvest_w = take_list("min_harvest", p.num_users, 0.0);
    p.harvest_efficiency = take_list("harvest_efficiency", p.num_users, 1.0);
    p.weights = take_list("weights", p.num_users, 1.0);

    cfg.seed = static_cast<std::uint64_t>(take_scalar("seed", false, 1));
    cfg.realizations = static_cast<int>(take_scalar("realizations", false, 1000));
    cfg.iteration_budget = static_cast<int>(take_scalar("budget", false, 0));
    cfg.workers = static_cast<int>(take_scalar("workers", false, 1));

    auto take_int_list = [&](const std::string &key, std::vector<int> &target) {
        auto it = entries.find(key);
        if (it == entries.end())
            return;
        it->second.used = true;
        target.clear();
        for (double v : it->second.values)
            target.push_back(static_cast<int>(v));
    };
    auto take_double_list = [&](const std::string &key, std::vector<double> &target) {
        auto it = entries.find(key);
        if (it == entries.end())
            return;
        it->second.used = true;
        target.clear();
        for (double v : it->second.values)
            target.push_back(detail::apply_unit(v, it->second.unit, key, it->second.line));
    };
    take_double_list("sweep_pmax_dbm", cfg.sweep_pmax_dbm);
    take_int_list("sweep_users", cfg.sweep_users);
    take_int_list("convergence_budgets", cfg.convergence_budgets);

    for (const auto &kv : entries)
        if (!kv.second.used)
            throw config_error("config line " + std::to_string(kv.second.line) +
                               ": unknown key '" + kv.first + "'");

    try {
        p.validate();
    } catch (const std::invalid_argument &e) {
        throw config_error("scenario file '" + path + "': " + e.what());
    }
    return cfg;
}

// Human-readable echo of the fully resolved parameter set, printed by the CLI
// so every run is auditable after unit conversion.
inline std::string format_params_banner(const SystemParams &p)
{
    std::ostringstream os;
    os << "scenario:\n"
       << "  users                 " << p.num_users << "\n"
       << "  subcarriers           " << p.num_subcarriers << "\n"
       << "  total bandwidth       " << p.total_bandwidth_hz << " Hz\n"
       << "  subcarrier bandwidth  " << p.subcarrier_bandwidth_hz << " Hz\n"
       << "  carrier frequency     " << p.carrier_frequency_hz << " Hz\n"
       << "  noise variance        " << p.noise_variance_w << " W\n"
       << "  circuit power         " << p.circuit_power_w << " W\n"
       << "  max tx power          " << p.max_tx_power_w << " W\n"
       << "  grid power            " << p.grid_power_w << " W\n"
       << "  radiated budget       " << p.tx_power_budget_w() << " W\n"
       << "  min rate              " << p.min_rate_bps << " bit/s\n"
       << "  amplifier ineff.      " << p.amplifier_inefficiency << "\n"
       << "  distances             [" << p.ref_distance_m << ", " << p.max_distance_m << "] m\n"
       << "  antenna gain          " << p.antenna_gain_db << " dB\n"
       << "  path loss exponent    " << p.path_loss_exponent << "\n";
    os << "  min harvest (W)      ";
    for (double v : p.min_harvest_w)
        os << ' ' << v;
    os << "\n  harvest efficiency   ";
    for (double v : p.harvest_efficiency)
        os << ' ' << v;
    os << "\n  weights              ";
    for (double v : p.weights)
        os << ' ' << v;
    os << "\n";
    return os.str();
}

} // namespace swipt

#endif
