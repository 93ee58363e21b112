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
// Monte Carlo harness: averaged energy efficiency, capacity and harvested
// power over random channel draws, swept over the transmit power cap and the
// user count, with the proposed ratio-maximizing scheme paired against the
// capacity-maximizing baseline on bit-identical realizations. Infeasible
// draws count as zero efficiency and zero capacity and are reported in the
// failure rate. Results are independent of the worker count: every draw is
// keyed by (seed, cell, index) and aggregation runs over stored
// per-realization records in index order.

#ifndef SWIPT_EXPERIMENTS_HPP
#define SWIPT_EXPERIMENTS_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dinkelbach.hpp"
#include "units.hpp"

namespace swipt {

struct ExperimentSpec
{
    SystemParams base;                  // prototype scenario; K and P_max come from the sweeps
    std::vector<double> pmax_dbm_sweep = {10, 14, 18, 22, 26, 30, 34, 38, 42, 46};
    std::vector<int> user_sweep = {1, 2, 4, 8};
    int realizations = 1000;
    std::uint64_t seed = 1;
    int iteration_budget = 0;           // 0 = tolerance-driven, > 0 = fixed total updates
    std::vector<int> convergence_budgets = {1, 2, 3, 5, 7, 10, 15, 20, 30, 50, 100, 200};
    int workers = 1;
    SolverOptions solver;

    void validate() const
    {
        if (pmax_dbm_sweep.empty() || user_sweep.empty())
            throw std::invalid_argument("ExperimentSpec: sweeps must be non-empty");
        if (realizations < 1)
            throw std::invalid_argument("ExperimentSpec: realizations must be >= 1");
        if (workers < 1)
            throw std::invalid_argument("ExperimentSpec: workers must be >= 1");
    }
};

// One (P_max, K, scheme) aggregate.
struct SweepCell
{
    std::string config_id;
    double pmax_dbm = 0.0;
    int num_users = 0;
    std::string scheme; // "proposed" or "baseline"
    double mean_ee = 0.0, se_ee = 0.0;
    double mean_capacity = 0.0, se_capacity = 0.0;
    double mean_harvested = 0.0, se_harvested = 0.0;
    double failure_rate = 0.0;
    int n_realizations = 0;
};

struct SweepResult
{
    std::vector<SweepCell> cells;
};

struct ConvergenceRow
{
    std::string config_id;
    double pmax_dbm = 0.0;
    int num_users = 0;
    int budget = 0;
    double mean_ee = 0.0, se_ee = 0.0;
    int n_realizations = 0;
};

namespace detail {

// Scenario for one sweep cell: per-user vectors are broadcast from the
// prototype (repeating the last entry when the cell has more users).
inline SystemParams cell_params(const SystemParams &base, int num_users, double pmax_dbm)
{
    SystemParams p = base;
    p.num_users = num_users;
    p.max_tx_power_w = dbm_to_watt(pmax_dbm);
    auto broadcast = [num_users](std::vector<double> v) {
        if (v.empty())
            throw std::invalid_argument("cell_params: empty per-user prototype");
        while (static_cast<int>(v.size()) < num_users)
            v.push_back(v.back());
        v.resize(num_users);
        return v;
    };
    p.min_harvest_w = broadcast(base.min_harvest_w);
    p.harvest_efficiency = broadcast(base.harvest_efficiency);
    p.weights = broadcast(base.weights);
    p.validate();
    return p;
}

inline std::string cell_id(double pmax_dbm, int num_users)
{
    std::ostringstream os;
    os << "pmax" << pmax_dbm << "_k" << num_users;
    return os.str();
}

// Parallel loop over realization indices; records land in caller-owned
// storage by index, so the schedule never affects the result.
template <typename Fn> inline void parallel_for(int count, int workers, Fn &&fn)
{
    if (workers <= 1) {
        for (int i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count)
                return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(workers, count);
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t)
        pool.emplace_back(work);
    for (auto &t : pool)
        t.join();
}

struct running_stats
{
    double mean = 0.0;
    double se = 0.0;
};

inline running_stats stats_of(const std::vector<double> &xs)
{
    running_stats s;
    const int n = static_cast<int>(xs.size());
    if (n == 0)
        return s;
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    s.mean = sum / n;
    if (n > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - s.mean) * (x - s.mean);
        s.se = std::sqrt(ss / (n - 1) / n);
    }
    return s;
}

inline std::string format_full(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

// Average energy efficiency, capacity and harvested power versus P_max and K,
// proposed and baseline paired on identical channel draws.
inline SweepResult sweep_pmax(const ExperimentSpec &spec)
{
    spec.validate();
    SweepResult result;

    struct Record
    {
        double ee_p = 0.0, cap_p = 0.0, harv_p = 0.0;
        double ee_b = 0.0, cap_b = 0.0, harv_b = 0.0;
        bool failed = true;
    };

    std::uint64_t cell_index = 0;
    for (double pmax : spec.pmax_dbm_sweep) {
        for (int users : spec.user_sweep) {
            const SystemParams params = detail::cell_params(spec.base, users, pmax);
            std::vector<Record> records(spec.realizations);

            SolverOptions opts = spec.solver;
            opts.fixed_iteration_budget = spec.iteration_budget;

            const std::uint64_t this_cell = cell_index++;
            detail::parallel_for(spec.realizations, spec.workers, [&](int r) {
                const std::uint64_t draw_seed =
                    random_stream::keyed(spec.seed, this_cell, static_cast<std::uint64_t>(r))
                        .next_u64();
                const ChannelRealization chan = sample_realization(params, draw_seed);
                Record rec;
                const FeasibilityReport feas = check_feasibility(chan, params);
                if (feas.feasible) {
                    rec.failed = false;
                    const SolveReport prop = maximize_ee(chan, params, opts, &feas);
                    rec.ee_p = prop.energy_efficiency;
                    rec.cap_p = prop.capacity_bps;
                    rec.harv_p = prop.harvested_power_w;
                    const SolveReport base = baseline_capacity_max(chan, params, opts, &feas);
                    rec.ee_b = base.energy_efficiency;
                    rec.cap_b = base.capacity_bps;
                    rec.harv_b = base.harvested_power_w;
                }
                records[r] = rec;
            });

            int failures = 0;
            std::vector<double> ee_p, cap_p, harv_p, ee_b, cap_b, harv_b;
            ee_p.reserve(records.size());
            for (const Record &rec : records) {
                if (rec.failed)
                    ++failures;
                ee_p.push_back(rec.ee_p);
                cap_p.push_back(rec.cap_p);
                harv_p.push_back(rec.harv_p);
                ee_b.push_back(rec.ee_b);
                cap_b.push_back(rec.cap_b);
                harv_b.push_back(rec.harv_b);
            }

            auto make_cell = [&](const char *scheme, const std::vector<double> &ee,
                                 const std::vector<double> &cap, const std::vector<double> &harv) {
                SweepCell c;
                c.config_id = detail::cell_id(pmax, users);
                c.pmax_dbm = pmax;
                c.num_users = users;
                c.scheme = scheme;
                const auto s_ee = detail::stats_of(ee);
                const auto s_cap = detail::stats_of(cap);
                const auto s_harv = detail::stats_of(harv);
                c.mean_ee = s_ee.mean;
                c.se_ee = s_ee.se;
                c.mean_capacity = s_cap.mean;
                c.se_capacity = s_cap.se;
                c.mean_harvested = s_harv.mean;
                c.se_harvested = s_harv.se;
                c.failure_rate = static_cast<double>(failures) / spec.realizations;
                c.n_realizations = spec.realizations;
                return c;
            };
            result.cells.push_back(make_cell("proposed", ee_p, cap_p, harv_p));
            result.cells.push_back(make_cell("baseline", ee_b, cap_b, harv_b));
        }
    }
    return result;
}

// Mean efficiency versus total iteration budget for every (P_max, K)
// configuration; one full budgeted run per (realization, budget) pair.
inline std::vector<ConvergenceRow> run_convergence(const ExperimentSpec &spec)
{
    spec.validate();
    if (spec.convergence_budgets.empty())
        throw std::invalid_argument("run_convergence: no budgets configured");

    std::vector<ConvergenceRow> rows;
    std::uint64_t cell_index = 0;
    for (double pmax : spec.pmax_dbm_sweep) {
        for (int users : spec.user_sweep) {
            const SystemParams params = detail::cell_params(spec.base, users, pmax);
            const int n_budgets = static_cast<int>(spec.convergence_budgets.size());
            std::vector<std::vector<double>> ee(n_budgets,
                                                std::vector<double>(spec.realizations, 0.0));

            const std::uint64_t this_cell = cell_index++;
            detail::parallel_for(spec.realizations, spec.workers, [&](int r) {
                const std::uint64_t draw_seed =
                    random_stream::keyed(spec.seed, this_cell, static_cast<std::uint64_t>(r))
                        .next_u64();
                const ChannelRealization chan = sample_realization(params, draw_seed);
                const FeasibilityReport feas = check_feasibility(chan, params);
                if (!feas.feasible)
                    return; // zero efficiency at every budget
                for (int b = 0; b < n_budgets; ++b) {
                    SolverOptions opts = spec.solver;
                    opts.fixed_iteration_budget = spec.convergence_budgets[b];
                    ee[b][r] = maximize_ee(chan, params, opts, &feas).energy_efficiency;
                }
            });

            for (int b = 0; b < n_budgets; ++b) {
                ConvergenceRow row;
                row.config_id = detail::cell_id(pmax, users);
                row.pmax_dbm = pmax;
                row.num_users = users;
                row.budget = spec.convergence_budgets[b];
                const auto s = detail::stats_of(ee[b]);
                row.mean_ee = s.mean;
                row.se_ee = s.se;
                row.n_realizations = spec.realizations;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV emission. Full-precision scientific notation, stable column order.
// ---------------------------------------------------------------------------

inline void emit_csv(const SweepResult &result, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
    out << "config_id,pmax_dbm,K,scheme,mean_ee_bit_per_joule,se_ee,mean_capacity_bps,"
           "se_capacity,mean_harvested_w,se_harvested,failure_rate,n_realizations\n";
    for (const SweepCell &c : result.cells) {
        out << c.config_id << ',' << detail::format_full(c.pmax_dbm) << ',' << c.num_users << ','
            << c.scheme << ',' << detail::format_full(c.mean_ee) << ','
            << detail::format_full(c.se_ee) << ',' << detail::format_full(c.mean_capacity) << ','
            << detail::format_full(c.se_capacity) << ',' << detail::format_full(c.mean_harvested)
            << ',' << detail::format_full(c.se_harvested) << ','
            << detail::format_full(c.failure_rate) << ',' << c.n_realizations << '\n';
    }
    if (!out.flush())
        throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

inline void emit_csv(const std::vector<ConvergenceRow> &rows, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
    out << "config_id,pmax_dbm,K,budget,mean_ee_bit_per_joule,se_ee,n_realizations\n";
    for (const ConvergenceRow &r : rows) {
        out << r.config_id << ',' << detail::format_full(r.pmax_dbm) << ',' << r.num_users << ','
            << r.budget << ',' << detail::format_full(r.mean_ee) << ','
            << detail::format_full(r.se_ee) << ',' << r.n_realizations << '\n';
    }
    if (!out.flush())
        throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

// Parses a sweep CSV back into memory (testing and downstream tooling).
inline SweepResult parse_sweep_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("parse_sweep_csv: cannot open '" + path + "'");
    SweepResult result;
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("parse_sweep_csv: empty file '" + path + "'");
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::istringstream ss(line);
        std::string field;
        SweepCell c;
        std::getline(ss, c.config_id, ',');
        std::getline(ss, field, ',');
        c.pmax_dbm = std::strtod(field.c_str(), nullptr);
        std::getline(ss, field, ',');
        c.num_users = std::atoi(field.c_str());
        std::getline(ss, c.scheme, ',');
        auto next = [&]() {
            std::getline(ss, field, ',');
            return std::strtod(field.c_str(), nullptr);
        };
        c.mean_ee = next();
        c.se_ee = next();
        c.mean_capacity = next();
        c.se_capacity = next();
        c.mean_harvested = next();
        c.se_harvested = next();
        c.failure_rate = next();
        std::getline(ss, field, ',');
        c.n_realizations = std::atoi(field.c_str());
        result.cells.push_back(c);
    }
    return result;
}

} // namespace swipt

#endif
