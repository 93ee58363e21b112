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
// Command-line front end.
//   solve        one channel draw end to end, report the allocation
//   sweep        averaged efficiency/capacity/harvest over P_max and K -> CSV
//   convergence  mean efficiency versus iteration budget -> CSV
//   oracle-check solver against the exhaustive grid reference on a tiny scenario
//
// Exit codes: 0 success, 1 infeasible single solve, 2 configuration error,
// 3 solver failed to converge within its budgets.

#include <CLI11.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include <swipt/swipt.hpp>

namespace {

struct CliOptions
{
    std::string config_path;
    std::string out_path;
    std::int64_t seed = -1;
    int realizations = -1;
    int budget = -1;
    int workers = -1;
    std::string trace_path;
};

void apply_overrides(swipt::ScenarioConfig &cfg, const CliOptions &opt)
{
    if (opt.seed >= 0)
        cfg.seed = static_cast<std::uint64_t>(opt.seed);
    if (opt.realizations > 0)
        cfg.realizations = opt.realizations;
    if (opt.budget >= 0)
        cfg.iteration_budget = opt.budget;
    if (opt.workers > 0)
        cfg.workers = opt.workers;
}

void print_banner(const swipt::ScenarioConfig &cfg)
{
    std::fputs(swipt::format_params_banner(cfg.params).c_str(), stdout);
    std::printf("  seed                  %" PRIu64 "\n", cfg.seed);
    std::printf("  iteration budget      %s\n",
                cfg.iteration_budget > 0 ? std::to_string(cfg.iteration_budget).c_str()
                                         : "tolerance-driven");
}

int run_solve(const swipt::ScenarioConfig &cfg, const CliOptions &opt)
{
    using namespace swipt;
    const ChannelRealization chan = sample_realization(cfg.params, cfg.seed);
    SolverOptions solver;
    solver.fixed_iteration_budget = cfg.iteration_budget;

    std::printf("channel draw (seed %" PRIu64 "):\n  user distances (m)   ", cfg.seed);
    for (double d : chan.distance_m)
        std::printf(" %.3f", d);
    std::printf("\n");

    const SolveReport rep = maximize_ee(chan, cfg.params, solver);
    if (!rep.feasible) {
        std::printf("infeasible realization: rate or power-transfer requirements cannot be met; "
                    "efficiency and capacity scored as zero\n");
        return 1;
    }

    std::printf("result:\n");
    std::printf("  energy efficiency     %.6e bit/J\n", rep.energy_efficiency);
    std::printf("  capacity              %.6e bit/s\n", rep.capacity_bps);
    std::printf("  total power           %.6f W\n", rep.total_power_w);
    std::printf("  harvested power       %.6e W\n", rep.harvested_power_w);
    std::printf("  served user           %d\n", rep.policy.selected_user);
    std::printf("  outer iterations      %d\n", rep.outer_iterations);
    std::printf("  converged             %s\n", rep.converged ? "yes" : "no");
    std::printf("  constraints feasible  %s (worst normalized residual %.3e)\n",
                rep.constraints.feasible ? "yes" : "no", rep.constraints.worst_normalized);
    std::printf("  trace (q, U, U_TP, F):\n");
    for (const auto &row : rep.trace)
        std::printf("    %.9e %.9e %.9e %.9e\n", row.q, row.weighted_capacity_bps,
                    row.total_power_w, row.f_value);

    if (!opt.trace_path.empty()) {
        std::ofstream out(opt.trace_path);
        if (!out) {
            std::fprintf(stderr, "error: cannot open trace file '%s'\n", opt.trace_path.c_str());
            return 2;
        }
        out << "outer_iteration,q,weighted_capacity_bps,total_power_w,f_value,inner_iterations\n";
        for (std::size_t n = 0; n < rep.trace.size(); ++n) {
            const auto &row = rep.trace[n];
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%d\n", n, row.q,
                          row.weighted_capacity_bps, row.total_power_w, row.f_value,
                          row.inner_iterations);
            out << buf;
        }
    }
    return rep.converged ? 0 : 3;
}

int run_sweep(const swipt::ScenarioConfig &cfg, const CliOptions &opt)
{
    using namespace swipt;
    const ExperimentSpec spec = cfg.experiment();
    const SweepResult result = sweep_pmax(spec);
    const std::string path = opt.out_path.empty() ? "sweep.csv" : opt.out_path;
    emit_csv(result, path);
    std::printf("wrote %zu rows to %s\n", result.cells.size(), path.c_str());
    return 0;
}

int run_convergence_cmd(const swipt::ScenarioConfig &cfg, const CliOptions &opt)
{
    using namespace swipt;
    const ExperimentSpec spec = cfg.experiment();
    const auto rows = run_convergence(spec);
    const std::string path = opt.out_path.empty() ? "convergence.csv" : opt.out_path;
    emit_csv(rows, path);
    std::printf("wrote %zu rows to %s\n", rows.size(), path.c_str());
    return 0;
}

int run_oracle_check(const swipt::ScenarioConfig &cfg, const CliOptions &)
{
    using namespace swipt;
    if (cfg.params.num_users > 3 || cfg.params.num_subcarriers > 4) {
        std::fprintf(stderr,
                     "error: oracle-check needs a tiny scenario (K <= 3, subcarriers <= 4); "
                     "got K=%d, n=%d\n",
                     cfg.params.num_users, cfg.params.num_subcarriers);
        return 2;
    }

    const int levels = cfg.params.num_subcarriers <= 2 ? 400 : 120;
    double worst = 0.0;
    int compared = 0;
    int feasibility_mismatch = 0;
    for (int r = 0; r < cfg.realizations; ++r) {
        const std::uint64_t draw_seed =
            random_stream::keyed(cfg.seed, 0, static_cast<std::uint64_t>(r)).next_u64();
        const ChannelRealization chan = sample_realization(cfg.params, draw_seed);
        const SolveReport solver = maximize_ee(chan, cfg.params);
        const OracleSolution coarse = grid_oracle(chan, cfg.params, levels / 2);
        const OracleSolution oracle = grid_oracle(chan, cfg.params, levels);
        if (solver.feasible != oracle.feasible_found) {
            ++feasibility_mismatch;
            continue;
        }
        if (!solver.feasible)
            continue;
        ++compared;
        const double gap =
            2.0 * std::abs(oracle.best_ee - coarse.best_ee) / std::max(oracle.best_ee, 1.0);
        const double dev = std::abs(solver.energy_efficiency - oracle.best_ee) /
                           std::max(oracle.best_ee, 1.0);
        worst = std::max(worst, dev - std::max(gap, 1e-3));
    }
    std::printf("oracle-check: %d comparisons, %d feasibility mismatches, worst excess "
                "deviation %.3e (at or below zero means inside the grid-gap bound)\n",
                compared, feasibility_mismatch, worst);
    return (worst <= 0.0 && feasibility_mismatch == 0) ? 0 : 3;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"energy-efficiency-maximizing resource allocation for SWIPT OFDM downlinks"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand name

    CliOptions opt;
    app.add_option("--config", opt.config_path, "scenario file")->required();
    app.add_option("--out", opt.out_path, "output CSV path");
    app.add_option("--seed", opt.seed, "override the scenario seed");
    app.add_option("--realizations", opt.realizations, "override the realization count");
    app.add_option("--budget", opt.budget, "override the iteration budget (0 = tolerance)");
    app.add_option("--workers", opt.workers, "worker thread count");
    app.add_option("--trace", opt.trace_path, "write the outer-iteration trace CSV here");

    auto *solve_cmd = app.add_subcommand("solve", "solve one channel draw end to end");
    auto *sweep_cmd = app.add_subcommand("sweep", "Monte Carlo sweep over P_max and K");
    auto *conv_cmd = app.add_subcommand("convergence", "mean efficiency versus iteration budget");
    auto *oracle_cmd =
        app.add_subcommand("oracle-check", "compare the solver against the grid reference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage problems are configuration errors
    }

    swipt::ScenarioConfig cfg;
    try {
        cfg = swipt::load_scenario(opt.config_path);
    } catch (const swipt::config_error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    apply_overrides(cfg, opt);
    print_banner(cfg);

    try {
        if (solve_cmd->parsed())
            return run_solve(cfg, opt);
        if (sweep_cmd->parsed())
            return run_sweep(cfg, opt);
        if (conv_cmd->parsed())
            return run_convergence_cmd(cfg, opt);
        if (oracle_cmd->parsed())
            return run_oracle_check(cfg, opt);
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
