// Shared scenario builders for the test suite.
#ifndef SWIPT_TEST_HELPERS_HPP
#define SWIPT_TEST_HELPERS_HPP

#include <swipt/channel.hpp>
#include <swipt/system_params.hpp>

namespace swipt_test {

// Scenario with directly assigned channel entries, for paper-and-pencil
// expected values. noise = 1 W so cnr equals the assigned gain.
struct FixedScenario
{
    swipt::SystemParams params;
    swipt::ChannelRealization realization;
};

inline FixedScenario make_fixed(int n_f, int users)
{
    FixedScenario s;
    swipt::SystemParams &p = s.params;
    p.num_users = users;
    p.num_subcarriers = n_f;
    p.subcarrier_bandwidth_hz = 39000.0;
    p.total_bandwidth_hz = 39000.0 * n_f;
    p.noise_variance_w = 1.0;
    p.circuit_power_w = 10.0;
    p.max_tx_power_w = 4.0;
    p.grid_power_w = 100.0;
    p.min_rate_bps = 0.0;
    p.min_harvest_w.assign(users, 0.0);
    p.harvest_efficiency.assign(users, 1.0);
    p.amplifier_inefficiency = 2.5;
    p.weights.assign(users, 1.0);
    p.ref_distance_m = 2.0;
    p.max_distance_m = 10.0;
    p.antenna_gain_db = 0.0;
    p.carrier_frequency_hz = 470e6;

    swipt::ChannelRealization &r = s.realization;
    r.fading_power = swipt::matrix(n_f, users, 1.0);
    r.cnr = swipt::matrix(n_f, users, 0.0);
    r.transfer_eff = swipt::matrix(n_f, users, 0.0);
    r.path_loss.assign(users, 1.0);
    r.shadowing.assign(users, 1.0);
    r.distance_m.assign(users, 2.0);
    return s;
}

// Downscaled indoor scenario for oracle-sized instances: same structure as
// the full system, small subcarrier counts, gentle rate and transfer floors.
inline swipt::SystemParams small_indoor_params(int users, int n_f,
                                               double pmax_dbm = 10.0,
                                               double min_rate_bps = 1e5,
                                               double req_dbm = -45.0)
{
    swipt::SystemParams p;
    p.num_users = users;
    p.num_subcarriers = n_f;
    p.subcarrier_bandwidth_hz = 39000.0;
    p.total_bandwidth_hz = 39000.0 * n_f;
    p.noise_variance_w = swipt::dbm_to_watt(-118.0);
    p.circuit_power_w = swipt::dbm_to_watt(20.0);
    p.max_tx_power_w = swipt::dbm_to_watt(pmax_dbm);
    p.grid_power_w = swipt::dbm_to_watt(30.0);
    p.min_rate_bps = min_rate_bps;
    p.min_harvest_w.assign(users, swipt::dbm_to_watt(req_dbm));
    p.harvest_efficiency.assign(users, 0.8);
    p.amplifier_inefficiency = 2.5;
    p.weights.assign(users, 1.0);
    p.ref_distance_m = 2.0;
    p.max_distance_m = 10.0;
    p.antenna_gain_db = 14.0;
    p.carrier_frequency_hz = 470e6;
    p.path_loss_exponent = 3.5;
    return p;
}

} // namespace swipt_test

#endif
