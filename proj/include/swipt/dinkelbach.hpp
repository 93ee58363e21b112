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
// Outer iteration for maximizing the energy-efficiency ratio U / U_TP by
// nonlinear fractional programming: solve the subtractive problem
// max U - q U_TP for a fixed q, then move q to the achieved ratio, until
// U - q U_TP falls below tolerance. The boundary value q = 0 doubles as the
// capacity-maximizing baseline scheme.

#ifndef SWIPT_DINKELBACH_HPP
#define SWIPT_DINKELBACH_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dual_solver.hpp"
#include "metrics.hpp"

namespace swipt {

struct OuterTraceRow
{
    double q = 0.0;
    double weighted_capacity_bps = 0.0; // U
    double total_power_w = 0.0;         // U_TP
    double f_value = 0.0;               // U - q * U_TP
    int inner_iterations = 0;
};

struct SolveReport
{
    double q_star = 0.0; // bit per Joule
    AllocationPolicy policy;
    std::vector<OuterTraceRow> trace;
    bool converged = false;
    int outer_iterations = 0;
    bool feasible = false;
    ConstraintReport constraints;

    double capacity_bps = 0.0;          // unweighted delivered rate
    double weighted_capacity_bps = 0.0; // U
    double total_power_w = 0.0;         // U_TP
    double harvested_power_w = 0.0;
    double energy_efficiency = 0.0;     // zero on infeasible realizations
};

// Subtractive objective of an inner solution at a given q, evaluated through
// the metrics path on the finalized policy.
inline double f_value(double q, const InnerSolution &inner, const ChannelRealization &realization,
                      const SystemParams &params)
{
    return weighted_capacity_bps(inner.policy, realization, params) -
           q * total_power_w(inner.policy, realization, params);
}

namespace detail {

inline SolveReport infeasible_report(const ChannelRealization &realization,
                                     const SystemParams &params)
{
    SolveReport rep;
    rep.policy = AllocationPolicy::zeros(realization.num_subcarriers(), realization.num_users());
    rep.constraints = check_constraints(rep.policy, realization, params, 1e-6);
    rep.feasible = false;
    rep.converged = false;
    // failed realizations score zero efficiency and zero capacity
    return rep;
}

inline void fill_metrics(SolveReport &rep, const ChannelRealization &realization,
                         const SystemParams &params)
{
    rep.capacity_bps = capacity_bps(rep.policy, realization, params);
    rep.weighted_capacity_bps = weighted_capacity_bps(rep.policy, realization, params);
    rep.total_power_w = total_power_w(rep.policy, realization, params);
    rep.harvested_power_w = harvested_power_w(rep.policy, realization);
    rep.energy_efficiency = rep.weighted_capacity_bps / rep.total_power_w;
    rep.constraints = check_constraints(rep.policy, realization, params, 1e-6);
}

} // namespace detail

// Iterative ratio maximization. Starts at q = 0, solves the subtractive inner
// problem, stops once U - q U_TP drops below epsilon relative to U or the
// outer iteration cap is reached. Infeasible realizations return the zero
// policy with zero efficiency and capacity.
inline SolveReport maximize_ee(const ChannelRealization &realization, const SystemParams &params,
                               const SolverOptions &opts = SolverOptions{},
                               const FeasibilityReport *feasibility = nullptr)
{
    opts.validate();
    const bool feasible =
        feasibility != nullptr ? feasibility->feasible : check_feasibility(realization, params).feasible;
    if (!feasible)
        return detail::infeasible_report(realization, params);

    SolveReport rep;
    rep.feasible = true;

    const bool budget_mode = opts.fixed_iteration_budget > 0;
    int budget_left = opts.fixed_iteration_budget;

    double q = 0.0;
    DualState warm;
    bool have_warm = false;
    AllocationPolicy seed;
    bool have_seed = false;

    AllocationPolicy best_policy;
    double best_ratio = -1.0;
    bool best_working = false;
    bool have_policy = false;

    for (int n = 0; n < opts.max_outer_iters; ++n) {
        SolverOptions inner_opts = opts;
        if (budget_mode) {
            if (budget_left <= 0)
                break;
            // The inner solve sees the whole remaining budget and returns
            // early once it has improved on the carried-over policy.
            inner_opts.fixed_iteration_budget = budget_left;
        }

        const InnerSolution inner =
            solve_inner(q, realization, params, inner_opts, have_warm ? &warm : nullptr,
                        have_seed ? &seed : nullptr);
        if (budget_mode)
            budget_left -= inner.iterations;

        const double u = inner.weighted_capacity_bps;
        const double utp = inner.total_power_w;
        const double f = u - q * utp;
        const double ratio = utp > 0.0 ? u / utp : 0.0;
        const double working_tol =
            budget_mode ? std::max(opts.violation_tolerance, 1e-2) : opts.violation_tolerance;
        const bool working = inner.policy.finalized &&
                             check_constraints(inner.policy, realization, params, 1e-6)
                                     .worst_normalized >= -working_tol;

        OuterTraceRow row;
        row.q = q;
        row.weighted_capacity_bps = u;
        row.total_power_w = utp;
        row.f_value = f;
        row.inner_iterations = inner.iterations;
        rep.trace.push_back(row);
        rep.outer_iterations = n + 1;

        // Keep the best ratio seen, preferring policies inside the working
        // tolerance; an unconverged inner may hand back a worse iterate.
        if (!have_policy || (working && !best_working) ||
            (working == best_working && ratio > best_ratio)) {
            best_policy = inner.policy;
            best_ratio = ratio;
            best_working = working;
            have_policy = true;
        }
        // Any in-tolerance iterate is a valid ratio-update candidate, and its
        // ratio lower-bounds the achievable efficiency.
        if (inner.best_ratio > best_ratio && inner.best_ratio_policy.finalized &&
            (!best_working ||
             check_constraints(inner.best_ratio_policy, realization, params, 1e-6)
                     .worst_normalized >= -working_tol)) {
            best_policy = inner.best_ratio_policy;
            best_ratio = inner.best_ratio;
            best_working = true;
            have_policy = true;
        }

        warm = inner.duals;
        have_warm = true;
        seed = inner.policy;
        have_seed = working;

        // The subtractive-value test is meaningful only once the inner
        // problem is actually solved; an unconverged iterate can sit at
        // F = 0 spuriously (the carried-over previous policy does exactly
        // that by construction of the q update).
        if (inner.converged && f < opts.dinkelbach_epsilon * std::max(u, 1e-30)) {
            rep.converged = true;
            break;
        }

        // Parametric update; q never moves backwards.
        const double q_prev = q;
        q = std::max({q, ratio, best_working ? best_ratio : ratio});
        // The water-level denominator carries q (eps - idle transfer) +
        // lambda eps + beta; shifting the budget price by -dq*eps keeps the
        // warm multipliers pointing at the same levels after the ratio
        // update. The transfer prices are re-fit against the channel at the
        // next solve entry.
        const double eps = params.amplifier_inefficiency;
        double shift = (q - q_prev) * eps;
        const double beta_cut = std::min(shift, warm.beta);
        warm.beta -= beta_cut;
        shift -= beta_cut;
        if (shift > 0.0)
            warm.lambda = std::max(0.0, warm.lambda - shift / eps);
    }

    rep.policy = have_policy
                     ? best_policy
                     : AllocationPolicy::zeros(realization.num_subcarriers(), realization.num_users());
    rep.q_star = std::max(best_ratio, 0.0);
    detail::fill_metrics(rep, realization, params);
    return rep;
}

// Baseline scheme: a single subtractive solve at q = 0, i.e. weighted system
// capacity maximization under the full constraint set.
inline SolveReport baseline_capacity_max(const ChannelRealization &realization,
                                         const SystemParams &params,
                                         const SolverOptions &opts = SolverOptions{},
                                         const FeasibilityReport *feasibility = nullptr)
{
    opts.validate();
    const bool feasible =
        feasibility != nullptr ? feasibility->feasible : check_feasibility(realization, params).feasible;
    if (!feasible)
        return detail::infeasible_report(realization, params);

    const InnerSolution inner = solve_inner(0.0, realization, params, opts);

    SolveReport rep;
    rep.feasible = true;
    rep.converged = inner.converged;
    rep.outer_iterations = 1;
    rep.policy = inner.policy;

    OuterTraceRow row;
    row.q = 0.0;
    row.weighted_capacity_bps = inner.weighted_capacity_bps;
    row.total_power_w = inner.total_power_w;
    row.f_value = inner.objective;
    row.inner_iterations = inner.iterations;
    rep.trace.push_back(row);

    detail::fill_metrics(rep, realization, params);
    rep.q_star = rep.energy_efficiency;
    return rep;
}

} // namespace swipt

#endif
