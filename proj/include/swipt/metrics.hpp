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

#ifndef SWIPT_METRICS_HPP
#define SWIPT_METRICS_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "channel.hpp"
#include "matrix.hpp"
#include "system_params.hpp"

namespace swipt {

// Decision variables: a power matrix P_{i,k} and a user-selection vector s_k.
// During the time-sharing relaxation s_k may be fractional; a finalized policy
// has exactly one selected user (or none) with s in {0,1}.
struct AllocationPolicy
{
    matrix power;                  // P_{i,k} >= 0, n_F x K
    std::vector<double> selection; // s_k in [0, 1]
    int selected_user = -1;        // index of the single served user, -1 = none
    bool finalized = false;

    static AllocationPolicy zeros(int n_f, int num_users)
    {
        AllocationPolicy p;
        p.power = matrix(n_f, num_users);
        p.selection.assign(num_users, 0.0);
        p.finalized = true;
        return p;
    }

    // Single-user policy: power_column on user k, everything else zero.
    static AllocationPolicy single_user(int n_f, int num_users, int k,
                                        const std::vector<double> &power_column)
    {
        AllocationPolicy p = zeros(n_f, num_users);
        p.selection[k] = 1.0;
        p.selected_user = k;
        for (int i = 0; i < n_f; ++i)
            p.power(i, k) = power_column[i];
        return p;
    }
};

// Signed slack of every constraint, positive = satisfied with margin.
// Residuals are stored in physical units; the feasibility decision divides
// each one by its right-hand scale because the constraints span many orders
// of magnitude.
struct ConstraintReport
{
    std::vector<double> c1_residual_w; // per user: harvested minus required transfer
    double c2_residual_w = 0.0;        // P_max minus radiated power
    double c3_residual_w = 0.0;        // P_PG minus total supply draw
    double c4_residual_bps = 0.0;      // delivered rate minus R_min
    double c5_residual = 0.0;          // 1 minus sum of selections
    bool c6_violation = false;         // selection not in {0,1}
    bool c7_violation = false;         // negative power entry
    bool feasible = false;
    double tolerance = 0.0;

    double worst_normalized = 0.0;     // most negative normalized residual

    std::vector<std::pair<std::string, double>> to_key_values() const
    {
        std::vector<std::pair<std::string, double>> kv;
        for (std::size_t k = 0; k < c1_residual_w.size(); ++k)
            kv.emplace_back("c1_residual_w_user" + std::to_string(k), c1_residual_w[k]);
        kv.emplace_back("c2_residual_w", c2_residual_w);
        kv.emplace_back("c3_residual_w", c3_residual_w);
        kv.emplace_back("c4_residual_bps", c4_residual_bps);
        kv.emplace_back("c5_residual", c5_residual);
        kv.emplace_back("c6_violation", c6_violation ? 1.0 : 0.0);
        kv.emplace_back("c7_violation", c7_violation ? 1.0 : 0.0);
        kv.emplace_back("feasible", feasible ? 1.0 : 0.0);
        kv.emplace_back("tolerance", tolerance);
        return kv;
    }
};

namespace detail {

inline void check_shapes(const AllocationPolicy &policy, const ChannelRealization &realization)
{
    if (!policy.power.same_shape(realization.cnr) ||
        policy.selection.size() != realization.cnr.cols())
        throw std::invalid_argument("metrics: policy shape does not match realization");
}

} // namespace detail

// Delivered system rate sum_{i,k} s_k W log2(1 + P_{i,k} Gamma_{i,k}); this is
// the quantity the minimum-rate constraint sees (no scheduling weights).
inline double capacity_bps(const AllocationPolicy &policy, const ChannelRealization &realization,
                           const SystemParams &params)
{
    detail::check_shapes(policy, realization);
    const double w_hz = params.subcarrier_bandwidth_hz;
    double rate = 0.0;
    for (int k = 0; k < realization.num_users(); ++k) {
        const double s = policy.selection[k];
        if (s == 0.0)
            continue;
        double user_rate = 0.0;
        for (int i = 0; i < realization.num_subcarriers(); ++i)
            user_rate += std::log2(1.0 + policy.power(i, k) * realization.cnr(i, k));
        rate += s * w_hz * user_rate;
    }
    return rate;
}

// Weighted objective U = sum_{i,k} w_k s_k W log2(1 + P Gamma).
inline double weighted_capacity_bps(const AllocationPolicy &policy,
                                    const ChannelRealization &realization,
                                    const SystemParams &params)
{
    detail::check_shapes(policy, realization);
    const double w_hz = params.subcarrier_bandwidth_hz;
    double value = 0.0;
    for (int k = 0; k < realization.num_users(); ++k) {
        const double ws = params.weights[k] * policy.selection[k];
        if (ws == 0.0)
            continue;
        double user_rate = 0.0;
        for (int i = 0; i < realization.num_subcarriers(); ++i)
            user_rate += std::log2(1.0 + policy.power(i, k) * realization.cnr(i, k));
        value += ws * w_hz * user_rate;
    }
    return value;
}

// Power collected by the idle users: P_H = sum_{i,k} P_{i,k} s_k
// sum_{j != k} e_{i,j}.
inline double harvested_power_w(const AllocationPolicy &policy,
                                const ChannelRealization &realization)
{
    detail::check_shapes(policy, realization);
    const int n_f = realization.num_subcarriers();
    const int K = realization.num_users();
    double harvested = 0.0;
    for (int i = 0; i < n_f; ++i) {
        double row_sum = 0.0;
        for (int j = 0; j < K; ++j)
            row_sum += realization.transfer_eff(i, j);
        for (int k = 0; k < K; ++k) {
            const double ps = policy.power(i, k) * policy.selection[k];
            if (ps != 0.0)
                harvested += ps * (row_sum - realization.transfer_eff(i, k));
        }
    }
    return harvested;
}

// System power dissipation U_TP = P_C + epsilon * sum P s - P_H. The harvested
// power re-enters the budget with a minus sign; epsilon >= 1 keeps it positive
// for physical channels.
inline double total_power_w(const AllocationPolicy &policy, const ChannelRealization &realization,
                            const SystemParams &params)
{
    detail::check_shapes(policy, realization);
    double radiated = 0.0;
    for (int k = 0; k < realization.num_users(); ++k) {
        const double s = policy.selection[k];
        if (s == 0.0)
            continue;
        for (int i = 0; i < realization.num_subcarriers(); ++i)
            radiated += policy.power(i, k) * s;
    }
    return params.circuit_power_w + params.amplifier_inefficiency * radiated -
           harvested_power_w(policy, realization);
}

// Bits delivered per Joule consumed.
inline double energy_efficiency(const AllocationPolicy &policy,
                                const ChannelRealization &realization, const SystemParams &params)
{
    const double dissipated = total_power_w(policy, realization, params);
    if (!(dissipated > 0.0))
        throw std::domain_error(
            "energy_efficiency: non-positive power dissipation (harvest exceeds amplifier draw)");
    return weighted_capacity_bps(policy, realization, params) / dissipated;
}

// Evaluates every constraint for a candidate policy. tol is relative: each
// residual is divided by its right-hand scale before the feasibility decision.
inline ConstraintReport check_constraints(const AllocationPolicy &policy,
                                          const ChannelRealization &realization,
                                          const SystemParams &params, double tol = 1e-6)
{
    detail::check_shapes(policy, realization);
    if (!(tol > 0.0))
        throw std::invalid_argument("check_constraints: tolerance must be positive");

    const int n_f = realization.num_subcarriers();
    const int K = realization.num_users();

    ConstraintReport rep;
    rep.tolerance = tol;
    rep.c1_residual_w.assign(K, 0.0);

    double radiated = 0.0;
    for (int k = 0; k < K; ++k) {
        const double s = policy.selection[k];
        if (s == 0.0)
            continue;
        for (int i = 0; i < n_f; ++i)
            radiated += policy.power(i, k) * s;
    }

    // C1: power transfer to each user, counted against its requirement when idle.
    std::vector<double> row_power(n_f, 0.0);
    for (int j = 0; j < K; ++j) {
        const double s = policy.selection[j];
        if (s == 0.0)
            continue;
        for (int i = 0; i < n_f; ++i)
            row_power[i] += policy.power(i, j) * s;
    }
    for (int k = 0; k < K; ++k) {
        double transferred = 0.0;
        for (int i = 0; i < n_f; ++i)
            transferred += row_power[i] * realization.transfer_eff(i, k);
        rep.c1_residual_w[k] =
            transferred - (1.0 - policy.selection[k]) * params.min_harvest_w[k];
    }

    rep.c2_residual_w = params.max_tx_power_w - radiated;
    rep.c3_residual_w =
        params.grid_power_w - (params.amplifier_inefficiency * radiated + params.circuit_power_w);
    rep.c4_residual_bps = capacity_bps(policy, realization, params) - params.min_rate_bps;

    double selection_sum = 0.0;
    for (int k = 0; k < K; ++k)
        selection_sum += policy.selection[k];
    rep.c5_residual = 1.0 - selection_sum;

    for (int k = 0; k < K; ++k) {
        const double s = policy.selection[k];
        if (std::min(std::abs(s), std::abs(s - 1.0)) > tol)
            rep.c6_violation = true;
    }
    for (int i = 0; i < n_f; ++i)
        for (int k = 0; k < K; ++k)
            if (policy.power(i, k) < -tol * params.max_tx_power_w)
                rep.c7_violation = true;

    auto normalized = [](double residual, double scale) {
        return residual / std::max(scale, 1e-300);
    };

    double worst = 0.0;
    for (int k = 0; k < K; ++k)
        worst = std::min(worst, normalized(rep.c1_residual_w[k], params.min_harvest_w[k]));
    worst = std::min(worst, normalized(rep.c2_residual_w, params.max_tx_power_w));
    worst = std::min(worst, normalized(rep.c3_residual_w, params.grid_power_w));
    worst = std::min(worst, normalized(rep.c4_residual_bps, params.min_rate_bps));
    worst = std::min(worst, rep.c5_residual);
    rep.worst_normalized = worst;

    rep.feasible = worst >= -tol && !rep.c6_violation && !rep.c7_violation;
    return rep;
}

} // namespace swipt

#endif
