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

#ifndef SWIPT_CHANNEL_HPP
#define SWIPT_CHANNEL_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "matrix.hpp"
#include "rng.hpp"
#include "system_params.hpp"

namespace swipt {

// One random channel draw for a scheduling slot. Fading is flat within a
// subcarrier and time-invariant within the slot; only channel power gains
// are modelled, never waveforms.
struct ChannelRealization
{
    matrix fading_power;              // |H_{i,k}|^2, n_F x K, unit-mean exponential
    std::vector<double> path_loss;    // l_k, linear gain
    std::vector<double> shadowing;    // g_k, linear gain (1.0 = 0 dB)
    std::vector<double> distance_m;   // d_k
    matrix cnr;                       // Gamma_{i,k} = l_k g_k |H_{i,k}|^2 / sigma_z^2
    matrix transfer_eff;              // e_{i,j} = eta_j |H_{i,j}|^2 l_j g_j
    std::uint64_t seed = 0;

    int num_subcarriers() const { return static_cast<int>(fading_power.rows()); }
    int num_users() const { return static_cast<int>(fading_power.cols()); }
};

inline double free_space_path_loss_db(double distance_m, double frequency_hz)
{
    constexpr double speed_of_light = 299792458.0;
    const double wavelength = speed_of_light / frequency_hz;
    return 20.0 * std::log10(4.0 * M_PI * distance_m / wavelength);
}

// Distance-dependent linear channel gain: free-space loss up to the reference
// distance d0, exponent-law decay beyond it, plus the effective antenna gain.
// The quoted 14 dB transceiver gain is counted once per link, not per end.
inline double path_loss(double distance_m, const SystemParams &params)
{
    if (!(distance_m >= params.ref_distance_m))
        throw std::invalid_argument("path_loss: distance below reference distance");

    const double fspl_d0 = free_space_path_loss_db(params.ref_distance_m, params.carrier_frequency_hz);
    const double beyond_db =
        10.0 * params.path_loss_exponent * std::log10(distance_m / params.ref_distance_m);
    const double gain_db = -(fspl_d0 + beyond_db) + params.antenna_gain_db;
    return db_to_linear(gain_db);
}

// Draws one realization. Users are dropped uniformly in [d0, d_max], fading
// powers are i.i.d. unit-mean exponential, shadowing is fixed at 0 dB. The
// draw order (distances first, then fading user by user) is part of the
// determinism contract: the same (params shape, seed) always reproduces the
// same realization bit for bit.
inline ChannelRealization sample_realization(const SystemParams &params, std::uint64_t seed)
{
    params.validate();
    const int n_f = params.num_subcarriers;
    const int K = params.num_users;

    ChannelRealization r;
    r.seed = seed;
    r.fading_power = matrix(n_f, K);
    r.cnr = matrix(n_f, K);
    r.transfer_eff = matrix(n_f, K);
    r.path_loss.resize(K);
    r.shadowing.assign(K, 1.0);
    r.distance_m.resize(K);

    random_stream rng = random_stream::keyed(seed);
    for (int k = 0; k < K; ++k) {
        r.distance_m[k] = rng.next_uniform(params.ref_distance_m, params.max_distance_m);
        r.path_loss[k] = path_loss(r.distance_m[k], params);
    }
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < n_f; ++i)
            r.fading_power(i, k) = rng.next_exponential();

    for (int k = 0; k < K; ++k) {
        const double lg = r.path_loss[k] * r.shadowing[k];
        for (int i = 0; i < n_f; ++i) {
            const double h2 = r.fading_power(i, k);
            r.cnr(i, k) = lg * h2 / params.noise_variance_w;
            r.transfer_eff(i, k) = params.harvest_efficiency[k] * h2 * lg;
        }
    }
    return r;
}

} // namespace swipt

#endif
