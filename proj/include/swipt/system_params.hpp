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

#ifndef SWIPT_SYSTEM_PARAMS_HPP
#define SWIPT_SYSTEM_PARAMS_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "units.hpp"

namespace swipt {

// Static scenario description for one downlink: a single transmitter, K
// single-antenna users, n_F subcarriers. One user per slot decodes data; the
// idle users harvest energy from the same radio signal. All powers are linear
// Watt, all bandwidths Hz.
struct SystemParams
{
    int num_users = 1;                     // K
    int num_subcarriers = 1;               // n_F
    double total_bandwidth_hz = 0.0;       // B
    double subcarrier_bandwidth_hz = 0.0;  // W = B / n_F
    double noise_variance_w = 0.0;         // sigma_z^2 per subcarrier
    double circuit_power_w = 0.0;          // P_C, static electronics dissipation
    double max_tx_power_w = 0.0;           // P_max, radiated power cap
    double grid_power_w = 0.0;             // P_PG, power-grid supply cap
    double min_rate_bps = 0.0;             // R_min, system rate requirement
    std::vector<double> min_harvest_w;     // per-user minimum power transfer when idle
    std::vector<double> harvest_efficiency; // eta_k in [0, 1]
    double amplifier_inefficiency = 1.0;   // epsilon >= 1 (1/epsilon = PA efficiency)
    std::vector<double> weights;           // w_k >= 0, scheduling priorities
    double ref_distance_m = 1.0;           // d0
    double max_distance_m = 1.0;           // d_max
    double antenna_gain_db = 0.0;          // effective gain applied once per link
    double carrier_frequency_hz = 0.0;     // f_c
    double path_loss_exponent = 3.5;       // decay exponent beyond d0

    // Radiated-power budget implied by the power cap and the grid supply:
    // min(P_max, (P_PG - P_C) / epsilon).
    double tx_power_budget_w() const
    {
        return std::min(max_tx_power_w, (grid_power_w - circuit_power_w) / amplifier_inefficiency);
    }

    void validate() const
    {
        auto fail = [](const std::string &msg) { throw std::invalid_argument("SystemParams: " + msg); };

        if (num_users < 1)
            fail("num_users must be >= 1");
        if (num_subcarriers < 1)
            fail("num_subcarriers must be >= 1");
        if (!(total_bandwidth_hz > 0.0) || !(subcarrier_bandwidth_hz > 0.0))
            fail("bandwidths must be positive");
        if (std::abs(subcarrier_bandwidth_hz * num_subcarriers - total_bandwidth_hz) >
            1e-9 * total_bandwidth_hz)
            fail("subcarrier_bandwidth * num_subcarriers must equal total_bandwidth");
        if (!(noise_variance_w > 0.0))
            fail("noise_variance must be positive");
        if (!(circuit_power_w > 0.0) || !(max_tx_power_w > 0.0) || !(grid_power_w > 0.0))
            fail("powers must be positive");
        if (!(grid_power_w > circuit_power_w))
            fail("grid_power must exceed circuit_power");
        if (min_rate_bps < 0.0)
            fail("min_rate must be non-negative");
        if (!(amplifier_inefficiency >= 1.0))
            fail("amplifier_inefficiency must be >= 1");
        if (!(carrier_frequency_hz > 0.0))
            fail("carrier_frequency must be positive");
        if (!(ref_distance_m > 0.0) || !(max_distance_m >= ref_distance_m))
            fail("distances must satisfy d_max >= d0 > 0");
        if (!(path_loss_exponent > 0.0))
            fail("path_loss_exponent must be positive");

        const auto k = static_cast<std::size_t>(num_users);
        if (min_harvest_w.size() != k || harvest_efficiency.size() != k || weights.size() != k)
            fail("per-user vectors must have length num_users");
        for (double v : min_harvest_w)
            if (v < 0.0)
                fail("min_harvest entries must be non-negative");
        for (double v : harvest_efficiency)
            if (v < 0.0 || v > 1.0)
                fail("harvest_efficiency entries must lie in [0, 1]");
        for (double v : weights)
            if (v < 0.0)
                fail("weights must be non-negative");
    }
};

// Indoor scenario used throughout the evaluation: 5 MHz / 128 subcarriers at
// 470 MHz, noise -118 dBm, P_C = 40 dBm, P_PG = 50 dBm, R_min = 10 Mbit/s,
// per-user harvest requirement -10 dBm, eta = 0.8, epsilon = 2.5, unit
// weights, service range 2..10 m, 14 dB link gain.
inline SystemParams default_indoor_params(int num_users = 4, double pmax_dbm = 30.0)
{
    SystemParams p;
    p.num_users = num_users;
    p.num_subcarriers = 128;
    p.total_bandwidth_hz = 5e6;
    p.subcarrier_bandwidth_hz = p.total_bandwidth_hz / p.num_subcarriers;
    p.noise_variance_w = dbm_to_watt(-118.0);
    p.circuit_power_w = dbm_to_watt(40.0);
    p.max_tx_power_w = dbm_to_watt(pmax_dbm);
    p.grid_power_w = dbm_to_watt(50.0);
    p.min_rate_bps = 1e7;
    p.min_harvest_w.assign(num_users, dbm_to_watt(-10.0));
    p.harvest_efficiency.assign(num_users, 0.8);
    p.amplifier_inefficiency = 2.5;
    p.weights.assign(num_users, 1.0);
    p.ref_distance_m = 2.0;
    p.max_distance_m = 10.0;
    p.antenna_gain_db = 14.0;
    p.carrier_frequency_hz = 470e6;
    p.path_loss_exponent = 3.5;
    return p;
}

} // namespace swipt

#endif
